#pragma once

#include <string>
#include <utility>
#include <vector>

namespace cyclecast {

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

/// Fixed-precision formatting for display tables (not for stored artifacts).
std::string format_fixed(double value, int decimals);

std::string read_file(const std::string& path);

/// Writes to a sibling temp file, then renames over the target.
void write_file_atomic(const std::string& path, const std::string& content);

std::vector<std::string> split(const std::string& text, char delim);

double parse_double(const std::string& text);
long long parse_int(const std::string& text);

std::vector<double> parse_double_list(const std::string& text);
std::string join_doubles(const std::vector<double>& values);

/// Ordered key=value block, one pair per line.
using KvPairs = std::vector<std::pair<std::string, std::string>>;

std::string kv_to_string(const KvPairs& pairs);
KvPairs kv_parse(const std::string& text);
const std::string& kv_get(const KvPairs& pairs, const std::string& key);
const std::string* kv_find(const KvPairs& pairs, const std::string& key);

}  // namespace cyclecast
