#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace snnbp {

inline constexpr const char* kVersion = "1.0.0";

// Flat key-value table with dotted keys ("section.key"); the raw text of each
// value is kept verbatim so the effective config echoes what was parsed.
struct Config {
    std::map<std::string, std::string> values;

    bool has(const std::string& key) const { return values.count(key) != 0; }
    const std::string& raw(const std::string& key) const;
    void set(const std::string& key, std::string value) { values[key] = std::move(value); }
};

// Sectioned key-value text: '[section]' headers, 'key = value' lines, blank
// lines and lines starting with '#' or ';' ignored. No inline comments.
Config parse_config_text(const std::string& text);
Config load_config_file(const std::filesystem::path& path);

// "section.key=value"
void apply_override(Config& config, const std::string& assignment);

// Canonical INI rendering: sections sorted, keys sorted within each section.
std::string render_config(const Config& config);

const std::vector<std::string>& known_commands();

// Fully-defaulted, validated parameter set for one command. Typed accessors
// assume validation already happened; they throw on internal misuse.
struct RunConfig {
    std::string command;
    std::filesystem::path output_dir = "out";
    bool emit_plots = true;
    std::uint64_t seed = 1;
    int threads = 1;
    Config table;

    double f64(const std::string& key) const;
    std::int64_t i64(const std::string& key) const;
    int i32(const std::string& key) const;
    std::uint64_t u64(const std::string& key) const;
    bool flag(const std::string& key) const;
    std::string str(const std::string& key) const;
    std::vector<int> int_list(const std::string& key) const;
    std::vector<std::int64_t> i64_list(const std::string& key) const;
};

// Loads the file (when given), applies overrides in order, then validates
// against the command's schema: unknown keys, type mismatches, and constraint
// violations raise std::invalid_argument naming the key path. Every key the
// command knows ends up present (defaults fill the gaps).
RunConfig parse_config(const std::string& command, const std::filesystem::path& config_path,
                       const std::vector<std::string>& overrides);

}  // namespace snnbp
