#pragma once

// JSON records for configuration structs. Readers start from the struct's
// defaults, overwrite the keys that are present and reject any other key.

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "vswno/data.hpp"
#include "vswno/operator.hpp"
#include "vswno/training.hpp"

namespace vswno {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

nlohmann::json to_json(const wno::WnoConfig& c);
nlohmann::json to_json(const data::GrfSpec& g);
nlohmann::json to_json(const training::TrainSchedule& s);
nlohmann::json to_json(const data::BurgersSpec& b);
nlohmann::json to_json(const data::DarcySpec& d);

/// `where` prefixes error messages (e.g. "model").
void read_json(const nlohmann::json& j, wno::WnoConfig& c, const std::string& where = "model");
void read_json(const nlohmann::json& j, data::GrfSpec& g, const std::string& where = "grf");
void read_json(const nlohmann::json& j, training::TrainSchedule& s, const std::string& where = "schedule");
void read_json(const nlohmann::json& j, data::BurgersSpec& b, const std::string& where = "burgers");
void read_json(const nlohmann::json& j, data::DarcySpec& d, const std::string& where = "darcy");

}  // namespace vswno
