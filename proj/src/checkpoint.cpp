#include "fairflow/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fairflow {

namespace {

using nlohmann::ordered_json;

ordered_json net_to_json(const Mlp& net) {
  ordered_json layers_w = ordered_json::array();
  ordered_json layers_b = ordered_json::array();
  for (std::size_t l = 0; l < net.w.size(); ++l) {
    const auto rows = static_cast<std::size_t>(net.sizes[l + 1]);
    const auto cols = static_cast<std::size_t>(net.sizes[l]);
    ordered_json wl = ordered_json::array();
    for (std::size_t r = 0; r < rows; ++r) {
      ordered_json row = ordered_json::array();
      for (std::size_t c = 0; c < cols; ++c) row.push_back(net.w[l][r * cols + c]);
      wl.push_back(std::move(row));
    }
    layers_w.push_back(std::move(wl));
    layers_b.push_back(net.b[l]);
  }
  return ordered_json{{"weights", std::move(layers_w)},
                      {"biases", std::move(layers_b)}};
}

Mlp net_from_json(const ordered_json& j, const std::vector<int>& sizes,
                  bool tanh_output) {
  Mlp net;
  net.sizes = sizes;
  net.tanh_output = tanh_output;
  const auto& jw = j.at("weights");
  const auto& jb = j.at("biases");
  if (jw.size() != sizes.size() - 1 || jb.size() != sizes.size() - 1) {
    throw CheckpointError(CheckpointError::Kind::kDimensionMismatch,
                          "layer count does not match layer_sizes");
  }
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const auto rows = static_cast<std::size_t>(sizes[l + 1]);
    const auto cols = static_cast<std::size_t>(sizes[l]);
    if (jw[l].size() != rows) {
      throw CheckpointError(CheckpointError::Kind::kDimensionMismatch,
                            "row count mismatch at layer " + std::to_string(l));
    }
    std::vector<double> flat;
    flat.reserve(rows * cols);
    for (const auto& row : jw[l]) {
      if (row.size() != cols) {
        throw CheckpointError(CheckpointError::Kind::kDimensionMismatch,
                              "column count mismatch at layer " + std::to_string(l));
      }
      for (const auto& v : row) flat.push_back(v.get<double>());
    }
    net.w.push_back(std::move(flat));
    net.b.push_back(jb[l].get<std::vector<double>>());
    if (net.b.back().size() != rows) {
      throw CheckpointError(CheckpointError::Kind::kDimensionMismatch,
                            "bias length mismatch at layer " + std::to_string(l));
    }
  }
  return net;
}

}  // namespace

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kBase: return "base";
    case Strategy::kA: return "a";
    case Strategy::kB: return "b";
    case Strategy::kC: return "c";
  }
  return "base";
}

Strategy strategy_from_name(const std::string& name) {
  if (name == "base") return Strategy::kBase;
  if (name == "a") return Strategy::kA;
  if (name == "b") return Strategy::kB;
  if (name == "c") return Strategy::kC;
  throw std::invalid_argument("unknown strategy: " + name);
}

PolicyNet PolicyNet::init(int obs_dim, Rng& rng) {
  PolicyNet net;
  net.pi = Mlp::init({obs_dim, 32, 16, 1}, /*tanh_output=*/true, rng, 0.01);
  net.v = Mlp::init({obs_dim, 32, 16, 1}, /*tanh_output=*/false, rng, 1.0);
  net.log_std = -0.5;
  return net;
}

std::string checkpoint_to_json(const PolicyCheckpoint& ckpt) {
  ordered_json j;
  j["format_version"] = ckpt.format_version;
  j["obs_dim"] = ckpt.net.obs_dim();
  j["layer_sizes"] = ckpt.net.pi.sizes;
  j["policy"] = net_to_json(ckpt.net.pi);
  j["value"] = net_to_json(ckpt.net.v);
  j["log_std"] = ckpt.net.log_std;
  j["strategy"] = strategy_name(ckpt.strategy);
  j["lambda"] = ckpt.lambda;
  j["loss_coef"] = ckpt.loss_coef;
  j["train_seed"] = ckpt.train_seed;
  j["steps_trained"] = ckpt.steps_trained;
  return j.dump(2);
}

PolicyCheckpoint checkpoint_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(CheckpointError::Kind::kMalformedFile,
                          std::string("checkpoint parse failure: ") + e.what());
  }
  try {
    PolicyCheckpoint ckpt;
    ckpt.format_version = j.at("format_version").get<int>();
    if (ckpt.format_version != kCheckpointFormatVersion) {
      throw CheckpointError(
          CheckpointError::Kind::kVersionMismatch,
          "checkpoint format_version " + std::to_string(ckpt.format_version) +
              ", expected " + std::to_string(kCheckpointFormatVersion));
    }
    const auto sizes = j.at("layer_sizes").get<std::vector<int>>();
    const int obs_dim = j.at("obs_dim").get<int>();
    if (sizes.empty() || sizes.front() != obs_dim) {
      throw CheckpointError(CheckpointError::Kind::kDimensionMismatch,
                            "obs_dim " + std::to_string(obs_dim) +
                                " does not match layer_sizes front");
    }
    ckpt.net.pi = net_from_json(j.at("policy"), sizes, /*tanh_output=*/true);
    ckpt.net.v = net_from_json(j.at("value"), sizes, /*tanh_output=*/false);
    ckpt.net.log_std = j.at("log_std").get<double>();
    ckpt.strategy = strategy_from_name(j.at("strategy").get<std::string>());
    ckpt.lambda = j.at("lambda").get<double>();
    ckpt.loss_coef = j.at("loss_coef").get<double>();
    ckpt.train_seed = j.at("train_seed").get<std::uint64_t>();
    ckpt.steps_trained = j.at("steps_trained").get<long long>();
    ckpt.net.pi.validate_shapes();
    ckpt.net.v.validate_shapes();
    return ckpt;
  } catch (const CheckpointError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(CheckpointError::Kind::kMalformedFile,
                          std::string("checkpoint missing/invalid field: ") + e.what());
  }
}

void save_checkpoint(const PolicyCheckpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << checkpoint_to_json(ckpt) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

PolicyCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw CheckpointError(CheckpointError::Kind::kMalformedFile,
                          "cannot open checkpoint: " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_json(ss.str());
}

}  // namespace fairflow
