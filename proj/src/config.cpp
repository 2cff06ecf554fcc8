#include "cirsum/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cirsum/errors.hpp"

namespace cirsum {

std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& text, const std::string& what) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last)
        throw config_error(what + ": cannot parse '" + text + "' as a number");
    return v;
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
    std::uint64_t v = 0;
    const char* first = text.data();
    const char* last = first + text.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last)
        throw config_error(what + ": cannot parse '" + text + "' as an unsigned integer");
    return v;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str(), path);
}

KeyValueConfig KeyValueConfig::from_string(const std::string& text, const std::string& origin) {
    KeyValueConfig cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw config_error(origin + ":" + std::to_string(lineno) +
                               ": expected key=value, got '" + stripped + "'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty())
            throw config_error(origin + ":" + std::to_string(lineno) + ": empty key");
        cfg.entries_.push_back({key, value, lineno});
    }
    return cfg;
}

const KeyValueConfig::Entry* KeyValueConfig::find(const std::string& key) const {
    const Entry* hit = nullptr;
    for (const Entry& e : entries_)
        if (e.key == key) hit = &e;  // last assignment wins
    return hit;
}

bool KeyValueConfig::has(const std::string& key) const { return find(key) != nullptr; }

void KeyValueConfig::set(const std::string& key, const std::string& value) {
    entries_.push_back({key, value, 0});
}

std::string KeyValueConfig::get_string(const std::string& key) const {
    const Entry* e = find(key);
    if (!e) throw config_error("config: missing required key '" + key + "'");
    return e->value;
}

std::string KeyValueConfig::get_string_or(const std::string& key,
                                          const std::string& dflt) const {
    const Entry* e = find(key);
    return e ? e->value : dflt;
}

double KeyValueConfig::get_double(const std::string& key) const {
    return parse_double(get_string(key), "config key '" + key + "'");
}

double KeyValueConfig::get_double_or(const std::string& key, double dflt) const {
    const Entry* e = find(key);
    if (!e) return dflt;
    return parse_double(e->value, "config key '" + key + "'");
}

std::uint64_t KeyValueConfig::get_u64_or(const std::string& key, std::uint64_t dflt) const {
    const Entry* e = find(key);
    if (!e) return dflt;
    return parse_u64(e->value, "config key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> KeyValueConfig::entries() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const Entry& e : entries_) {
        bool seen = false;
        for (auto& kv : out)
            if (kv.first == e.key) {
                kv.second = e.value;
                seen = true;
                break;
            }
        if (!seen) out.emplace_back(e.key, e.value);
    }
    return out;
}

}  // namespace cirsum
