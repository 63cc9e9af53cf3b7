#include "tonerec/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tonerec {

static_assert(std::endian::native == std::endian::little,
              "checkpoint i/o assumes a little-endian host");

void save_checkpoint(const std::string& path, const ToneNet<float>& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "TONOCKPT 1\n";
  auto tensors = named_tensors(const_cast<ModelParams<float>&>(model.params));
  for (const auto& nt : tensors) {
    out << nt.name << ' ' << nt.tensor->ndim();
    for (int d : nt.tensor->shape) out << ' ' << d;
    out << '\n';
    out.write(reinterpret_cast<const char*>(nt.tensor->values.data()),
              static_cast<std::streamsize>(nt.tensor->values.size() * sizeof(float)));
  }
  out << "END\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

struct RawTensor {
  std::string name;
  std::vector<int> shape;
  std::vector<float> values;
};

std::vector<RawTensor> read_raw(const std::string& path, bool with_values) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "TONOCKPT 1") {
    throw std::runtime_error("bad checkpoint header: " + path);
  }
  std::vector<RawTensor> out;
  while (std::getline(in, line)) {
    if (line == "END") return out;
    std::istringstream ls(line);
    RawTensor t;
    int ndim = 0;
    if (!(ls >> t.name >> ndim) || ndim < 1 || ndim > 8) {
      throw std::runtime_error("bad checkpoint tensor line: " + line);
    }
    std::int64_t numel = 1;
    for (int i = 0; i < ndim; ++i) {
      int d = 0;
      if (!(ls >> d) || d < 1) throw std::runtime_error("bad checkpoint shape: " + line);
      t.shape.push_back(d);
      numel *= d;
    }
    t.values.resize(static_cast<size_t>(numel));
    in.read(reinterpret_cast<char*>(t.values.data()),
            static_cast<std::streamsize>(t.values.size() * sizeof(float)));
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
    if (!with_values) t.values.clear();
    out.push_back(std::move(t));
  }
  throw std::runtime_error("checkpoint missing END line: " + path);
}

}  // namespace

ToneNet<float> load_checkpoint(const std::string& path) {
  std::vector<RawTensor> raw = read_raw(path, true);

  // infer the architecture from shapes, then check every tensor against it
  ModelConfig cfg;
  int gru_input_dim = -1;
  for (const RawTensor& t : raw) {
    if (t.name == "conv1.kernels" && t.shape.size() == 4) cfg.conv_channels = t.shape[0];
    if (t.name == "gru_fwd.u_z" && t.shape.size() == 2) cfg.hidden = t.shape[0];
    if (t.name == "gru_fwd.w_z" && t.shape.size() == 2) gru_input_dim = t.shape[1];
  }
  if (gru_input_dim < 1) {
    throw std::runtime_error("checkpoint/model shape mismatch: missing gru_fwd.w_z");
  }
  cfg.validate();

  ToneNet<float> model;
  model.cfg = cfg;
  model.params = make_params<float>(cfg, gru_input_dim);
  auto tensors = named_tensors(model.params);
  if (tensors.size() != raw.size()) {
    throw std::runtime_error("checkpoint/model shape mismatch: tensor count");
  }
  for (size_t i = 0; i < tensors.size(); ++i) {
    if (raw[i].name != tensors[i].name || raw[i].shape != tensors[i].tensor->shape) {
      throw std::runtime_error("checkpoint/model shape mismatch: " + raw[i].name);
    }
    tensors[i].tensor->values = std::move(raw[i].values);
  }
  return model;
}

std::vector<std::pair<std::string, std::vector<int>>> inspect_checkpoint(
    const std::string& path) {
  std::vector<std::pair<std::string, std::vector<int>>> out;
  for (RawTensor& t : read_raw(path, false)) {
    out.emplace_back(std::move(t.name), std::move(t.shape));
  }
  return out;
}

}  // namespace tonerec
