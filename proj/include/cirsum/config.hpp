#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cirsum {

// Shortest decimal string that parses back to exactly the same double
// ('.' decimal point, no locale).  Used for every numeric field the tools
// emit, so outputs are byte-stable and lossless.
std::string fmt_double(double v);

// Parse one double / unsigned integer out of a complete string (no trailing
// junk allowed).  `what` names the offending key or column in the error.
double parse_double(const std::string& text, const std::string& what);
std::uint64_t parse_u64(const std::string& text, const std::string& what);

// A flat key=value configuration: one pair per line, '#' starts a comment,
// blank lines are skipped, whitespace around key and value is trimmed.
// Later assignments to the same key override earlier ones.
class KeyValueConfig {
  public:
    KeyValueConfig() = default;

    static KeyValueConfig from_file(const std::string& path);
    static KeyValueConfig from_string(const std::string& text,
                                      const std::string& origin = "<inline>");

    bool has(const std::string& key) const;
    // Programmatic override (command-line flags beat the file).
    void set(const std::string& key, const std::string& value);

    // Getters throw config_error naming the key (and file line where known)
    // when the key is absent or malformed.
    std::string get_string(const std::string& key) const;
    std::string get_string_or(const std::string& key, const std::string& dflt) const;
    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double dflt) const;
    std::uint64_t get_u64_or(const std::string& key, std::uint64_t dflt) const;

    // Keys in first-appearance order with their final values.
    std::vector<std::pair<std::string, std::string>> entries() const;

  private:
    struct Entry {
        std::string key, value;
        int line = 0;  // 0 when set programmatically
    };
    std::vector<Entry> entries_;
    std::string origin_;

    const Entry* find(const std::string& key) const;
};

}  // namespace cirsum
