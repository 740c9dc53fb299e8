#pragma once

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace watertwin {

/// Layered tool settings: hard-coded fallbacks, overridden by a flat JSON
/// file, overridden again by WATERTWIN_* environment variables. A key like
/// "budget_ms" maps to the variable WATERTWIN_BUDGET_MS. Values are flat
/// scalars; structure belongs in dedicated input files, not here.
class ToolConfig {
public:
    ToolConfig() = default;

    static ToolConfig from_json(const nlohmann::json& j) {
        if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
        ToolConfig c;
        for (const auto& [key, value] : j.items()) {
            if (value.is_string())
                c.values_[key] = value.get<std::string>();
            else if (value.is_boolean())
                c.values_[key] = value.get<bool>() ? "true" : "false";
            else if (value.is_number())
                c.values_[key] = value.dump();
            else
                throw std::invalid_argument("config value for '" + key +
                                            "' must be a string, number or boolean");
        }
        return c;
    }

    static ToolConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open config file " + path);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in, nullptr, true, true);  // comments welcome
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(path + " is not valid JSON: " + e.what());
        }
        return from_json(j);
    }

    std::string text(const std::string& key, const std::string& fallback) const {
        auto v = raw(key);
        return v ? *v : fallback;
    }

    double number(const std::string& key, double fallback) const {
        auto v = raw(key);
        if (!v) return fallback;
        try {
            std::size_t used = 0;
            double d = std::stod(*v, &used);
            if (used != v->size()) throw std::invalid_argument("");
            return d;
        } catch (const std::exception&) {
            throw std::invalid_argument("setting '" + key + "' should be a number, got '" + *v +
                                        "'");
        }
    }

    long long integer(const std::string& key, long long fallback) const {
        auto v = raw(key);
        if (!v) return fallback;
        try {
            std::size_t used = 0;
            long long n = std::stoll(*v, &used);
            if (used != v->size()) throw std::invalid_argument("");
            return n;
        } catch (const std::exception&) {
            throw std::invalid_argument("setting '" + key + "' should be an integer, got '" + *v +
                                        "'");
        }
    }

    bool flag(const std::string& key, bool fallback) const {
        auto v = raw(key);
        if (!v) return fallback;
        std::string s;
        for (char c : *v) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
        if (s == "0" || s == "false" || s == "no" || s == "off") return false;
        throw std::invalid_argument("setting '" + key + "' should be a boolean, got '" + *v + "'");
    }

    bool has(const std::string& key) const { return raw(key).has_value(); }

private:
    std::optional<std::string> raw(const std::string& key) const {
        std::string env_name = "WATERTWIN_";
        for (char c : key)
            env_name += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        if (const char* env = std::getenv(env_name.c_str())) return std::string(env);
        auto it = values_.find(key);
        if (it != values_.end()) return it->second;
        return std::nullopt;
    }

    std::map<std::string, std::string> values_;
};

}  // namespace watertwin
