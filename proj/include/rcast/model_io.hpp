#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rcast/config.hpp"
#include "rcast/deep_esn.hpp"
#include "rcast/error.hpp"
#include "rcast/field.hpp"
#include "rcast/qeesn.hpp"
#include "rcast/ssvs.hpp"

namespace rcast {

// ---------------------------------------------------------------------------
// Flat little-endian binary records.
//
// Every file starts with an 8-byte ASCII magic followed by u64 dimension
// fields; the payload is IEEE-754 binary64 values. Matrices are row-major.

class BinaryWriter {
 public:
  explicit BinaryWriter(std::string_view magic) {
    require(magic.size() == 8, ErrorKind::io, "binary magic must be 8 bytes");
    buf_.append(magic);
  }

  void u64(std::uint64_t v) {
    for (int b = 0; b < 8; ++b) buf_.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
  }

  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  void vec(const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) f64(v(i));
  }

  void mat(const Matrix& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
  }

  const std::string& bytes() const { return buf_; }

 private:
  std::string buf_;
};

class BinaryReader {
 public:
  BinaryReader(std::string bytes, std::string_view magic, std::string what)
      : buf_(std::move(bytes)), what_(std::move(what)) {
    require(buf_.size() >= 8 && std::string_view(buf_).substr(0, 8) == magic, ErrorKind::format,
            what_ + ": bad magic (expected " + std::string(magic) + ")");
    pos_ = 8;
  }

  std::uint64_t u64() {
    require(pos_ + 8 <= buf_.size(), ErrorKind::format, what_ + ": truncated file");
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= std::uint64_t(static_cast<unsigned char>(buf_[pos_ + b])) << (8 * b);
    pos_ += 8;
    return v;
  }

  Eigen::Index dim() {
    const auto v = u64();
    require(v < (std::uint64_t(1) << 32), ErrorKind::format, what_ + ": implausible dimension");
    return static_cast<Eigen::Index>(v);
  }

  double f64() { return std::bit_cast<double>(u64()); }

  Vector vec(Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = f64();
    return v;
  }

  Matrix mat(Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = f64();
    return m;
  }

  void finish() const { require(pos_ == buf_.size(), ErrorKind::format, what_ + ": trailing bytes"); }

 private:
  std::string buf_;
  std::string what_;
  std::size_t pos_ = 0;
};

inline constexpr std::string_view kMembersMagic = "RCQMEM01";
inline constexpr std::string_view kBasisMagic = "RCBASIS1";
inline constexpr std::string_view kReductionMagic = "RCREDUC1";
inline constexpr std::string_view kChainMagic = "RCCHAIN1";

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

inline std::uint64_t parse_hex64(const std::string& s) {
  require(!s.empty() && s.size() <= 16, ErrorKind::format, "bad hex value '" + s + "'");
  return std::stoull(s, nullptr, 16);
}

inline json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline Vector json_vector(const json& a) {
  Vector v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
  return v;
}

inline json stream_json(const RngStream& s) {
  return {{"base_seed", s.base_seed}, {"stream_id", s.stream_id}};
}

inline RngStream json_stream(const json& j) {
  return {j.at("base_seed").get<std::uint64_t>(), j.at("stream_id").get<std::uint64_t>()};
}

inline json scaling_json(const Standardizer& s) { return {{"mean", vector_json(s.mean)}, {"scale", vector_json(s.scale)}}; }

inline Standardizer json_scaling(const json& j) { return {json_vector(j.at("mean")), json_vector(j.at("scale"))}; }

inline std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

template <typename Fn>
auto parse_model_json(const std::filesystem::path& path, Fn&& fn) {
  const json j = parse_json_text(read_text_file(path), path.string());
  try {
    return fn(j);
  } catch (const json::exception& e) {
    fail(ErrorKind::format, path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Q-EESN model directory: model.json + members.bin
//
// members.bin: magic "RCQMEM01", u64 n_members, u64 n_y, u64 n_features,
// then per member (in member_id order) f64 sigma2_eps followed by the
// n_y x n_features readout [V1 V2], row-major.

inline void save_qeesn(const QeesnEnsemble& ens, const ModelConfig& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json j;
  j["format"] = "rcast-qeesn/1";
  j["config"] = config_to_json(cfg);
  j["base_seed"] = ens.base_seed;
  j["data_fingerprint"] = hex64(ens.data_fingerprint);
  j["n_training_rows"] = ens.n_training_rows;
  j["input_scaling"] = scaling_json(ens.input_scaling);
  j["response_mean"] = vector_json(ens.response_mean);
  json members = json::array();
  for (const auto& m : ens.members)
    members.push_back({{"member_id", m.member_id}, {"reservoir_stream", stream_json(m.reservoir_seed)}});
  j["members"] = members;
  write_file_atomic(dir / "model.json", dump_json(j));

  const Eigen::Index n_features = ens.members.front().v.cols();
  BinaryWriter w(kMembersMagic);
  w.u64(ens.members.size());
  w.u64(static_cast<std::uint64_t>(ens.n_y()));
  w.u64(static_cast<std::uint64_t>(n_features));
  for (const auto& m : ens.members) {
    w.f64(m.sigma2_eps);
    w.mat(m.v);
  }
  write_file_atomic(dir / "members.bin", w.bytes());
}

inline QeesnEnsemble load_qeesn(const std::filesystem::path& dir, ModelConfig* cfg_out = nullptr) {
  QeesnEnsemble ens;
  std::vector<std::pair<std::uint64_t, RngStream>> ids;
  parse_model_json(dir / "model.json", [&](const json& j) {
    require(j.at("format").get<std::string>() == "rcast-qeesn/1", ErrorKind::format, "model.json: not a qeesn model");
    const ModelConfig cfg = parse_config(j.at("config"));
    ens.hyper = cfg.qeesn;
    if (cfg_out) *cfg_out = cfg;
    ens.base_seed = j.at("base_seed").get<std::uint64_t>();
    ens.data_fingerprint = parse_hex64(j.at("data_fingerprint").get<std::string>());
    ens.n_training_rows = j.at("n_training_rows").get<Eigen::Index>();
    ens.input_scaling = json_scaling(j.at("input_scaling"));
    ens.response_mean = json_vector(j.at("response_mean"));
    for (const auto& m : j.at("members"))
      ids.emplace_back(m.at("member_id").get<std::uint64_t>(), json_stream(m.at("reservoir_stream")));
    return 0;
  });
  BinaryReader r(read_text_file(dir / "members.bin"), kMembersMagic, (dir / "members.bin").string());
  const auto n = r.dim();
  const auto n_y = r.dim();
  const auto nf = r.dim();
  require(n == static_cast<Eigen::Index>(ids.size()) && n_y == ens.n_y() &&
              nf == 2 * static_cast<Eigen::Index>(ens.hyper.reservoir.n_h),
          ErrorKind::format, "members.bin: dimensions disagree with model.json");
  for (Eigen::Index i = 0; i < n; ++i) {
    QeesnMember m;
    m.member_id = ids[static_cast<std::size_t>(i)].first;
    m.reservoir_seed = ids[static_cast<std::size_t>(i)].second;
    m.sigma2_eps = r.f64();
    m.v = r.mat(n_y, nf);
    ens.members.push_back(std::move(m));
  }
  r.finish();
  return ens;
}

// ---------------------------------------------------------------------------
// SSVS chain: chain.bin + chain.json sidecar
//
// chain.bin: magic "RCCHAIN1", u64 n_kept, u64 q, u64 k, then per kept draw
// f64 sigma2_eta, q x k beta (row-major), q x k gamma as 0.0 / 1.0.

inline void save_chain(const SsvsChain& chain, const std::filesystem::path& bin, const std::filesystem::path& sidecar) {
  BinaryWriter w(kChainMagic);
  w.u64(chain.n_kept());
  w.u64(static_cast<std::uint64_t>(chain.n_features()));
  w.u64(static_cast<std::uint64_t>(chain.n_responses()));
  for (std::size_t d = 0; d < chain.n_kept(); ++d) {
    w.f64(chain.sigma2_eta[d]);
    w.mat(chain.beta[d]);
    w.mat(chain.gamma[d].cast<double>());
  }
  write_file_atomic(bin, w.bytes());
  json j = {{"format", "rcast-ssvs-chain/1"},
            {"n_kept", chain.n_kept()},
            {"n_features", chain.n_features()},
            {"n_responses", chain.n_responses()},
            {"n_iter", chain.n_iter},
            {"burn", chain.burn},
            {"thin", chain.thin},
            {"seed", stream_json(chain.seed)},
            {"record", {"sigma2_eta", "beta[q][k]", "gamma[q][k]"}}};
  write_file_atomic(sidecar, dump_json(j));
}

inline SsvsChain load_chain(const std::filesystem::path& bin, const std::filesystem::path& sidecar) {
  SsvsChain chain;
  parse_model_json(sidecar, [&](const json& j) {
    chain.n_iter = j.at("n_iter").get<int>();
    chain.burn = j.at("burn").get<int>();
    chain.thin = j.at("thin").get<int>();
    chain.seed = json_stream(j.at("seed"));
    return 0;
  });
  BinaryReader r(read_text_file(bin), kChainMagic, bin.string());
  const auto n = r.dim(), q = r.dim(), k = r.dim();
  for (Eigen::Index d = 0; d < n; ++d) {
    chain.sigma2_eta.push_back(r.f64());
    chain.beta.push_back(r.mat(q, k));
    chain.gamma.push_back(r.mat(q, k).cast<std::uint8_t>());
  }
  r.finish();
  return chain;
}

// ---------------------------------------------------------------------------
// D-EESN model directory: deesn.json, basis.bin, reduction.bin, chain.bin,
// chain.json.
//
// basis.bin: magic "RCBASIS1", u64 n_y, u64 k, then mean[n_y], phi (n_y x k),
// truncation_sigma2[n_y].
// reduction.bin: magic "RCREDUC1", u64 n_res, u64 L-1, then for each stack j
// and reduced layer l = 2..L: u64 n, u64 k, column_means[n], components
// (n x k), singular_values[k].

inline void save_deesn(const DeesnModel& model, const ModelConfig& cfg, const std::filesystem::path& dir,
                       const json& ga_trace = json::array()) {
  std::filesystem::create_directories(dir);
  json j;
  j["format"] = "rcast-deesn/1";
  j["config"] = config_to_json(cfg);
  j["n_res"] = model.n_res;
  j["base_seed"] = model.base_seed;
  j["data_fingerprint"] = hex64(model.data_fingerprint);
  j["input_scaling"] = scaling_json(model.input_scaling);
  j["feature_scaling"] = scaling_json(model.feature_scaling);
  json stacks = json::array();
  for (const auto& s : model.stacks) {
    json seeds = json::array();
    for (const auto& r : s.reservoir_seeds) seeds.push_back(stream_json(r));
    stacks.push_back({{"reservoir_streams", seeds}});
  }
  j["stacks"] = stacks;
  j["ga_trace"] = ga_trace;
  write_file_atomic(dir / "deesn.json", dump_json(j));

  BinaryWriter b(kBasisMagic);
  b.u64(static_cast<std::uint64_t>(model.basis.phi.rows()));
  b.u64(static_cast<std::uint64_t>(model.basis.phi.cols()));
  b.vec(model.basis.mean);
  b.mat(model.basis.phi);
  b.vec(model.basis.truncation_sigma2);
  write_file_atomic(dir / "basis.bin", b.bytes());

  BinaryWriter red(kReductionMagic);
  red.u64(model.stacks.size());
  red.u64(static_cast<std::uint64_t>(model.config.layers - 1));
  for (const auto& s : model.stacks)
    for (const auto& p : s.bases) {
      red.u64(static_cast<std::uint64_t>(p.components.rows()));
      red.u64(static_cast<std::uint64_t>(p.components.cols()));
      red.vec(p.column_means);
      red.mat(p.components);
      red.vec(p.singular_values);
    }
  write_file_atomic(dir / "reduction.bin", red.bytes());
  save_chain(model.chain, dir / "chain.bin", dir / "chain.json");
}

inline DeesnModel load_deesn(const std::filesystem::path& dir, ModelConfig* cfg_out = nullptr) {
  DeesnModel model;
  parse_model_json(dir / "deesn.json", [&](const json& j) {
    require(j.at("format").get<std::string>() == "rcast-deesn/1", ErrorKind::format, "deesn.json: not a deesn model");
    const ModelConfig cfg = parse_config(j.at("config"));
    if (cfg_out) *cfg_out = cfg;
    model.config = cfg.deesn;
    model.n_res = j.at("n_res").get<int>();
    model.base_seed = j.at("base_seed").get<std::uint64_t>();
    model.data_fingerprint = parse_hex64(j.at("data_fingerprint").get<std::string>());
    model.input_scaling = json_scaling(j.at("input_scaling"));
    model.feature_scaling = json_scaling(j.at("feature_scaling"));
    for (const auto& s : j.at("stacks")) {
      DeepStack st;
      for (const auto& r : s.at("reservoir_streams")) st.reservoir_seeds.push_back(json_stream(r));
      model.stacks.push_back(std::move(st));
    }
    return 0;
  });
  require(static_cast<int>(model.stacks.size()) == model.n_res, ErrorKind::format, "deesn.json: stack count != n_res");

  BinaryReader b(read_text_file(dir / "basis.bin"), kBasisMagic, (dir / "basis.bin").string());
  const auto n_y = b.dim(), k = b.dim();
  model.basis.mean = b.vec(n_y);
  model.basis.phi = b.mat(n_y, k);
  model.basis.truncation_sigma2 = b.vec(n_y);
  b.finish();

  BinaryReader red(read_text_file(dir / "reduction.bin"), kReductionMagic, (dir / "reduction.bin").string());
  const auto n_stacks = red.dim(), n_red = red.dim();
  require(n_stacks == model.n_res && n_red == model.config.layers - 1, ErrorKind::format,
          "reduction.bin: dimensions disagree with deesn.json");
  for (auto& s : model.stacks)
    for (Eigen::Index l = 0; l < n_red; ++l) {
      PcaBasis p;
      const auto n = red.dim(), kk = red.dim();
      p.column_means = red.vec(n);
      p.components = red.mat(n, kk);
      p.singular_values = red.vec(kk);
      s.bases.push_back(std::move(p));
    }
  red.finish();
  model.chain = load_chain(dir / "chain.bin", dir / "chain.json");
  return model;
}

}  // namespace rcast
