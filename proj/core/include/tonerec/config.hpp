#pragma once

#include <string>

#include "tonerec/dsp.hpp"
#include "tonerec/model.hpp"
#include "tonerec/synth.hpp"
#include "tonerec/trainer.hpp"

namespace tonerec {

struct CliConfig {
  FrontendConfig frontend;
  ModelConfig model;
  TrainConfig train;
  SynthConfig synth;
};

// Flat key=value lines; '#' starts a comment; unknown keys are rejected with
// the offending line number. Values land on top of whatever `cfg` held.
void apply_config_file(const std::string& path, CliConfig& cfg);

// Single assignment like "epochs=40"; used for file lines and overrides.
void apply_config_entry(const std::string& key, const std::string& value, CliConfig& cfg);

FrontendMode parse_frontend_mode(const std::string& name);
std::string frontend_mode_name(FrontendMode mode);

}  // namespace tonerec
