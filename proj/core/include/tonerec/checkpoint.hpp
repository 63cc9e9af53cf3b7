#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tonerec/model.hpp"

namespace tonerec {

// Checkpoint layout: the text line "TONOCKPT 1\n"; for each tensor in
// named_tensors() order, a text line "name ndim d1 d2 ...\n" followed by the
// values as little-endian IEEE-754 32-bit floats; the text line "END\n".
void save_checkpoint(const std::string& path, const ToneNet<float>& model);

ToneNet<float> load_checkpoint(const std::string& path);

// Names and shapes only, in file order.
std::vector<std::pair<std::string, std::vector<int>>> inspect_checkpoint(
    const std::string& path);

}  // namespace tonerec
