#include "vswno/serialization.hpp"

#include <set>

namespace vswno {

using nlohmann::json;

namespace {

class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where_ + "." + key + ": wrong type");
    }
  }

  void get_size(const char* key, std::size_t& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
      throw ConfigError(where_ + "." + key + ": expected a nonnegative integer");
    out = v.get<std::size_t>();
  }

  template <typename Parse, typename T>
  void get_enum(const char* key, T& out, Parse parse) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    if (!j_.at(key).is_string()) throw ConfigError(where_ + "." + key + ": expected a string");
    try {
      out = parse(j_.at(key).get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

std::string basis_name(data::GrfBasis b) {
  return b == data::GrfBasis::FourierPeriodic ? "fourier-periodic" : "cosine-neumann";
}

data::GrfBasis parse_basis(const std::string& s) {
  if (s == "fourier-periodic") return data::GrfBasis::FourierPeriodic;
  if (s == "cosine-neumann") return data::GrfBasis::CosineNeumann;
  throw std::invalid_argument("unknown basis '" + s + "'");
}

}  // namespace

json to_json(const wno::WnoConfig& c) {
  return json{{"grid", c.grid},
              {"in_channels", c.in_channels},
              {"width", c.width},
              {"hidden", c.hidden},
              {"blocks", c.blocks},
              {"wavelet", c.wavelet},
              {"levels", c.levels},
              {"mode", std::string(wavelet::mode_name(c.mode))},
              {"neuron", std::string(neurons::kind_name(c.neuron))},
              {"sigma", std::string(neurons::activation_name(c.sigma))},
              {"sts", c.sts},
              {"encoding", std::string(neurons::encoding_name(c.encoding))},
              {"trainable_neurons", c.trainable_neurons},
              {"surrogate_slope", c.surrogate_slope}};
}

json to_json(const data::GrfSpec& g) {
  return json{{"scale", g.scale}, {"shift", g.shift}, {"exponent", g.exponent}, {"basis", basis_name(g.basis)}};
}

json to_json(const training::TrainSchedule& s) {
  return json{{"epochs", s.epochs},  {"batch_size", s.batch_size},     {"lr", s.lr},
              {"lr_step", s.lr_step}, {"lr_decay", s.lr_decay},
              {"weight_decay", s.weight_decay}, {"alpha", s.alpha}, {"gamma", s.gamma},
              {"seed", s.seed},      {"record_wall_time", s.record_wall_time}};
}

json to_json(const data::BurgersSpec& b) {
  return json{{"n", b.n},         {"nu", b.nu},         {"t_end", b.t_end}, {"grf", to_json(b.grf)},
              {"n_train", b.n_train}, {"n_test", b.n_test}, {"seed", b.seed}};
}

json to_json(const data::DarcySpec& d) {
  return json{{"h", d.h},         {"w", d.w},           {"source", d.source}, {"grf", to_json(d.grf)},
              {"n_train", d.n_train}, {"n_test", d.n_test}, {"seed", d.seed}};
}

void read_json(const json& j, wno::WnoConfig& c, const std::string& where) {
  Reader r(j, where);
  r.get("grid", c.grid);
  r.get_size("in_channels", c.in_channels);
  r.get_size("width", c.width);
  r.get_size("hidden", c.hidden);
  r.get_size("blocks", c.blocks);
  r.get("wavelet", c.wavelet);
  r.get_size("levels", c.levels);
  r.get_enum("mode", c.mode, [](const std::string& s) { return wavelet::parse_mode(s); });
  r.get_enum("neuron", c.neuron, [](const std::string& s) { return neurons::parse_kind(s); });
  r.get_enum("sigma", c.sigma, [](const std::string& s) { return neurons::parse_activation(s); });
  r.get_size("sts", c.sts);
  r.get_enum("encoding", c.encoding, [](const std::string& s) { return neurons::parse_encoding(s); });
  r.get("trainable_neurons", c.trainable_neurons);
  r.get("surrogate_slope", c.surrogate_slope);
  r.finish();
}

void read_json(const json& j, data::GrfSpec& g, const std::string& where) {
  Reader r(j, where);
  r.get("scale", g.scale);
  r.get("shift", g.shift);
  r.get("exponent", g.exponent);
  r.get_enum("basis", g.basis, parse_basis);
  r.finish();
}

void read_json(const json& j, training::TrainSchedule& s, const std::string& where) {
  Reader r(j, where);
  r.get_size("epochs", s.epochs);
  r.get_size("batch_size", s.batch_size);
  r.get("lr", s.lr);
  r.get_size("lr_step", s.lr_step);
  r.get("lr_decay", s.lr_decay);
  r.get("weight_decay", s.weight_decay);
  r.get("alpha", s.alpha);
  r.get("gamma", s.gamma);
  r.get("seed", s.seed);
  r.get("record_wall_time", s.record_wall_time);
  r.finish();
}

void read_json(const json& j, data::BurgersSpec& b, const std::string& where) {
  Reader r(j, where);
  r.get_size("n", b.n);
  r.get("nu", b.nu);
  r.get("t_end", b.t_end);
  if (const json* g = r.child("grf")) read_json(*g, b.grf, where + ".grf");
  r.get_size("n_train", b.n_train);
  r.get_size("n_test", b.n_test);
  r.get("seed", b.seed);
  r.finish();
}

void read_json(const json& j, data::DarcySpec& d, const std::string& where) {
  Reader r(j, where);
  r.get_size("h", d.h);
  r.get_size("w", d.w);
  r.get("source", d.source);
  if (const json* g = r.child("grf")) read_json(*g, d.grf, where + ".grf");
  r.get_size("n_train", d.n_train);
  r.get_size("n_test", d.n_test);
  r.get("seed", d.seed);
  r.finish();
}

}  // namespace vswno
