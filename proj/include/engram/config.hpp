#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace engram {

// JSON configuration with dotted-key access ("retrieval.budget"). Unknown
// keys fall back to the caller's default; present keys with the wrong type
// are schema errors, never silent defaults.
class Config {
  public:
    Config() : root_(nlohmann::json::object()) {}
    explicit Config(nlohmann::json root);

    static Config load(const std::string& path);
    static Config parse(const std::string& json_text, const std::string& origin = "<inline>");

    bool has(const std::string& dotted_key) const;
    std::string get_string(const std::string& dotted_key, const std::string& fallback) const;
    long long get_int(const std::string& dotted_key, long long fallback) const;
    double get_double(const std::string& dotted_key, double fallback) const;
    bool get_bool(const std::string& dotted_key, bool fallback) const;

    const nlohmann::json& snapshot() const { return root_; }

  private:
    const nlohmann::json* find(const std::string& dotted_key) const;
    nlohmann::json root_;
};

}  // namespace engram
