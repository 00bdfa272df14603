#include "engram/config.hpp"

#include <fstream>
#include <sstream>

#include "engram/errors.hpp"

namespace engram {

using nlohmann::json;

Config::Config(json root) : root_(std::move(root)) {
    if (!root_.is_object()) throw SchemaError("config root must be a JSON object");
}

Config Config::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StorageError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
}

Config Config::parse(const std::string& json_text, const std::string& origin) {
    json doc = json::parse(json_text, nullptr, false);
    if (doc.is_discarded()) throw SchemaError(origin + ": config is not valid JSON");
    if (!doc.is_object()) throw SchemaError(origin + ": config root must be a JSON object");
    return Config(std::move(doc));
}

const json* Config::find(const std::string& dotted_key) const {
    const json* node = &root_;
    std::size_t start = 0;
    while (true) {
        std::size_t dot = dotted_key.find('.', start);
        std::string part = dotted_key.substr(start, dot - start);
        if (!node->is_object() || !node->contains(part)) return nullptr;
        node = &node->at(part);
        if (dot == std::string::npos) return node;
        start = dot + 1;
    }
}

bool Config::has(const std::string& dotted_key) const { return find(dotted_key) != nullptr; }

std::string Config::get_string(const std::string& dotted_key, const std::string& fallback) const {
    const json* node = find(dotted_key);
    if (!node) return fallback;
    if (!node->is_string()) throw SchemaError("config key " + dotted_key + " must be a string");
    return node->get<std::string>();
}

long long Config::get_int(const std::string& dotted_key, long long fallback) const {
    const json* node = find(dotted_key);
    if (!node) return fallback;
    if (!node->is_number_integer())
        throw SchemaError("config key " + dotted_key + " must be an integer");
    return node->get<long long>();
}

double Config::get_double(const std::string& dotted_key, double fallback) const {
    const json* node = find(dotted_key);
    if (!node) return fallback;
    if (!node->is_number())
        throw SchemaError("config key " + dotted_key + " must be a number");
    return node->get<double>();
}

bool Config::get_bool(const std::string& dotted_key, bool fallback) const {
    const json* node = find(dotted_key);
    if (!node) return fallback;
    if (!node->is_boolean())
        throw SchemaError("config key " + dotted_key + " must be a boolean");
    return node->get<bool>();
}

}  // namespace engram
