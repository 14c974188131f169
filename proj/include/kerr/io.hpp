#pragma once
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kerr/field.hpp"
#include "kerr/geometry.hpp"

namespace kerr {

inline constexpr std::string_view kToolVersion = "1.0.0";

// Malformed or invalid configuration; line = 0 when no position applies.
// The message already carries "<file>:<line>: " when a position is known.
struct ConfigError : std::runtime_error {
  int line = 0;
  explicit ConfigError(const std::string& msg, int line_ = 0)
      : std::runtime_error(msg), line(line_) {}
};

// Flat "section.key = value" run description: '#' starts a comment, blank
// lines are ignored, keys must contain a '.', duplicates are rejected so one
// file determines one run with no silent overrides.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(std::string_view text,
                             const std::string& name = "<config>");

  bool has(const std::string& key) const { return kv_.count(key) != 0; }
  int line_of(const std::string& key) const;  // 0 when absent
  const std::string& name() const { return name_; }

  // required-key getters: throw ConfigError naming the key
  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  long long get_int(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  // comma-separated list of numbers
  std::vector<double> get_double_list(const std::string& key) const;

  // defaulted getters
  std::string get_string(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key, double def) const;
  long long get_int(const std::string& key, long long def) const;
  bool get_bool(const std::string& key, bool def) const;
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& def) const;

 private:
  std::string name_;
  std::map<std::string, std::string> kv_;
  std::map<std::string, int> lines_;
};

// background.{M, a, k} (defaults 1, 0, 1) with the non-extremality check
// M^2 > a^2; violations raise ConfigError pointing at the offending key.
KerrBackground background_from_config(const Config& cfg);

// ------------------------------------------------------------- mode table
// Cached per-(n, omega) spectral data: the angular eigenvalue and, outside
// the exclusion radius of the excluded points {0, omega0}, the transmission
// row plus the boundary residuals of the two Jost solves behind it.
struct ModeTableRecord {
  int n = 0;              // angular line, 1-based
  std::uint32_t iw = 0;   // index into the omega ladder
  double omega = 0.0;
  double lambda = 0.0;
  bool has_scattering = false;
  cplx alpha{};
  cplx beta{};
  double t11 = 0.0, t12 = 0.0, t22 = 0.0;
  double residual_acute = 0.0, residual_grave = 0.0;
};

struct ModeTable {
  std::uint64_t bg_hash = 0;  // background_hash() of the writing run
  std::string version;        // writing tool version
  double M = 1.0, a = 0.0;
  int k = 0;
  int n_max = 0;
  std::vector<double> omega;             // the ladder
  std::vector<ModeTableRecord> records;  // unique (n, iw), iw-major order
};

// FNV-1a over the raw bit patterns of (M, a, k).
std::uint64_t background_hash(const KerrBackground& bg);

// Raw little-endian binary, lossless for every double bit pattern.
void write_mode_table(const ModeTable& table, const std::string& path);

// Throws std::runtime_error on truncation, bad magic, a stored hash that
// does not match the hash recomputed from the stored background (tampering),
// duplicate (n, iw) keys, or records inconsistent with the stored ladder.
ModeTable read_mode_table(const std::string& path);

// ------------------------------------------------------- field snapshots
// Self-describing binary container: header (background, time, dims), the two
// grids as 8-byte floats, then row-major complex pairs for psi1, psi2 and,
// when present, the exact derivative planes.
void write_snapshot(const FieldState& st, const KerrBackground& bg,
                    const std::string& path);

struct Snapshot {
  FieldState state;
  KerrBackground bg;
};

// Throws std::runtime_error on truncation or bad magic; grid sanity is
// enforced by validate_state on the decoded state.
Snapshot read_snapshot(const std::string& path);

}  // namespace kerr
