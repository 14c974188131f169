#include "kerr/io.hpp"

#include <bit>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

namespace kerr {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail_at(const std::string& name, int line, const std::string& msg) {
  std::ostringstream os;
  os << name << ":" << line << ": " << msg;
  throw ConfigError(os.str(), line);
}

}  // namespace

Config Config::parse_string(std::string_view text, const std::string& name) {
  Config c;
  c.name_ = name;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!line.empty()) {
      const std::size_t eq = line.find('=');
      if (eq == std::string_view::npos)
        fail_at(name, line_no, "expected 'section.key = value'");
      const std::string key(trim(line.substr(0, eq)));
      const std::string value(trim(line.substr(eq + 1)));
      if (key.empty() || key.find('.') == std::string::npos)
        fail_at(name, line_no, "key must be of the form section.key");
      if (value.empty()) fail_at(name, line_no, "empty value for key '" + key + "'");
      const auto [it, fresh] = c.kv_.emplace(key, value);
      if (!fresh)
        fail_at(name, line_no,
                "duplicate key '" + key + "' (first set at line " +
                    std::to_string(c.lines_[key]) + ")");
      c.lines_[key] = line_no;
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return c;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return parse_string(os.str(), path);
}

int Config::line_of(const std::string& key) const {
  const auto it = lines_.find(key);
  return it == lines_.end() ? 0 : it->second;
}

std::string Config::get_string(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end())
    throw ConfigError(name_ + ": missing required key '" + key + "'");
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& def) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? def : it->second;
}

double Config::get_double(const std::string& key) const {
  const std::string s = get_string(key);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE)
    fail_at(name_, line_of(key), "value for '" + key + "' is not a number: " + s);
  return v;
}

double Config::get_double(const std::string& key, double def) const {
  return has(key) ? get_double(key) : def;
}

long long Config::get_int(const std::string& key) const {
  const std::string s = get_string(key);
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size() || errno == ERANGE)
    fail_at(name_, line_of(key), "value for '" + key + "' is not an integer: " + s);
  return v;
}

long long Config::get_int(const std::string& key, long long def) const {
  return has(key) ? get_int(key) : def;
}

bool Config::get_bool(const std::string& key) const {
  const std::string s = get_string(key);
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  fail_at(name_, line_of(key), "value for '" + key + "' is not a boolean: " + s);
}

bool Config::get_bool(const std::string& key, bool def) const {
  return has(key) ? get_bool(key) : def;
}

std::vector<double> Config::get_double_list(const std::string& key) const {
  const std::string s = get_string(key);
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    const std::string item(trim(std::string_view(s).substr(pos, comma - pos)));
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || end != item.c_str() + item.size() || errno == ERANGE)
      fail_at(name_, line_of(key), "value for '" + key + "' is not a number list: " + s);
    out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

std::vector<double> Config::get_double_list(const std::string& key,
                                            const std::vector<double>& def) const {
  return has(key) ? get_double_list(key) : def;
}

KerrBackground background_from_config(const Config& cfg) {
  const double M = cfg.get_double("background.M", 1.0);
  const double a = cfg.get_double("background.a", 0.0);
  const long long k = cfg.get_int("background.k", 1);
  if (!(M > 0.0))
    throw ConfigError(cfg.name() + ": background.M must be positive",
                      cfg.line_of("background.M"));
  if (!(M * M > a * a))
    throw ConfigError(cfg.name() + ": background must be non-extreme (M^2 > a^2)",
                      cfg.line_of("background.a"));
  return KerrBackground(M, a, static_cast<int>(k));
}

// ------------------------------------------------------------- binary plumbing
namespace {

std::uint64_t hash_raw(double M, double a, long long k) {
  const auto mix = [](std::uint64_t h, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 0x100000001b3ull;
    }
    return h;
  };
  std::uint64_t h = 0xcbf29ce484222325ull;
  h = mix(h, std::bit_cast<std::uint64_t>(M));
  h = mix(h, std::bit_cast<std::uint64_t>(a));
  h = mix(h, static_cast<std::uint64_t>(k));
  return h;
}

struct Writer {
  std::ofstream f;
  explicit Writer(const std::string& path) : f(path, std::ios::binary) {}
  void bytes(const void* p, std::size_t n) {
    f.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u32(std::uint32_t v) { bytes(&v, 4); }
  void u64(std::uint64_t v) { bytes(&v, 8); }
  void i32(std::int32_t v) { bytes(&v, 4); }
  void f64(double v) { bytes(&v, 8); }
  void f64v(const std::vector<double>& v) { bytes(v.data(), 8 * v.size()); }
  void cxv(const std::vector<cplx>& v) { bytes(v.data(), 16 * v.size()); }
};

struct Reader {
  std::ifstream f;
  std::string path;
  explicit Reader(const std::string& p) : f(p, std::ios::binary), path(p) {
    if (!f) throw std::runtime_error("cannot open file: " + p);
  }
  void bytes(void* p, std::size_t n) {
    f.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (f.gcount() != static_cast<std::streamsize>(n))
      throw std::runtime_error("truncated file: " + path);
  }
  std::uint8_t u8() { std::uint8_t v; bytes(&v, 1); return v; }
  std::uint32_t u32() { std::uint32_t v; bytes(&v, 4); return v; }
  std::uint64_t u64() { std::uint64_t v; bytes(&v, 8); return v; }
  std::int32_t i32() { std::int32_t v; bytes(&v, 4); return v; }
  double f64() { double v; bytes(&v, 8); return v; }
  std::vector<double> f64v(std::size_t n) {
    std::vector<double> v(n);
    bytes(v.data(), 8 * n);
    return v;
  }
  std::vector<cplx> cxv(std::size_t n) {
    std::vector<cplx> v(n);
    bytes(v.data(), 16 * n);
    return v;
  }
};

constexpr char kTableMagic[4] = {'K', 'M', 'T', '1'};
constexpr char kSnapMagic[4] = {'K', 'F', 'S', '1'};
// sanity caps so a corrupt header can't drive allocations to the moon
constexpr std::uint64_t kMaxCount = 1ull << 32;

}  // namespace

std::uint64_t background_hash(const KerrBackground& bg) {
  return hash_raw(bg.M, bg.a, bg.k);
}

void write_mode_table(const ModeTable& table, const std::string& path) {
  Writer w(path);
  w.bytes(kTableMagic, 4);
  w.u32(static_cast<std::uint32_t>(table.version.size()));
  w.bytes(table.version.data(), table.version.size());
  w.u64(table.bg_hash);
  w.f64(table.M);
  w.f64(table.a);
  w.i32(table.k);
  w.i32(table.n_max);
  w.u64(table.omega.size());
  w.f64v(table.omega);
  w.u64(table.records.size());
  for (const ModeTableRecord& r : table.records) {
    w.i32(r.n);
    w.u32(r.iw);
    w.f64(r.omega);
    w.f64(r.lambda);
    w.u8(r.has_scattering ? 1 : 0);
    w.f64(r.alpha.real());
    w.f64(r.alpha.imag());
    w.f64(r.beta.real());
    w.f64(r.beta.imag());
    w.f64(r.t11);
    w.f64(r.t12);
    w.f64(r.t22);
    w.f64(r.residual_acute);
    w.f64(r.residual_grave);
  }
  if (!w.f.good()) throw std::runtime_error("write failed: " + path);
}

ModeTable read_mode_table(const std::string& path) {
  Reader rd(path);
  char magic[4];
  rd.bytes(magic, 4);
  if (std::memcmp(magic, kTableMagic, 4) != 0)
    throw std::runtime_error("not a mode table file: " + path);
  ModeTable t;
  const std::uint32_t vlen = rd.u32();
  if (vlen > 64) throw std::runtime_error("corrupt version field: " + path);
  t.version.resize(vlen);
  rd.bytes(t.version.data(), vlen);
  t.bg_hash = rd.u64();
  t.M = rd.f64();
  t.a = rd.f64();
  t.k = rd.i32();
  t.n_max = rd.i32();
  if (t.bg_hash != hash_raw(t.M, t.a, t.k))
    throw std::runtime_error(
        "mode table integrity check failed (stored hash does not match the "
        "stored background): " + path);
  const std::uint64_t nomega = rd.u64();
  if (nomega > kMaxCount) throw std::runtime_error("corrupt ladder size: " + path);
  t.omega = rd.f64v(nomega);
  const std::uint64_t nrec = rd.u64();
  if (nrec > kMaxCount) throw std::runtime_error("corrupt record count: " + path);
  t.records.resize(nrec);
  std::set<std::pair<int, std::uint32_t>> seen;
  for (ModeTableRecord& r : t.records) {
    r.n = rd.i32();
    r.iw = rd.u32();
    r.omega = rd.f64();
    r.lambda = rd.f64();
    r.has_scattering = rd.u8() != 0;
    const double ar = rd.f64(), ai = rd.f64(), br = rd.f64(), bi = rd.f64();
    r.alpha = cplx(ar, ai);
    r.beta = cplx(br, bi);
    r.t11 = rd.f64();
    r.t12 = rd.f64();
    r.t22 = rd.f64();
    r.residual_acute = rd.f64();
    r.residual_grave = rd.f64();
    if (r.n < 1 || r.n > t.n_max || r.iw >= t.omega.size())
      throw std::runtime_error("mode table record out of range: " + path);
    if (std::bit_cast<std::uint64_t>(r.omega) !=
        std::bit_cast<std::uint64_t>(t.omega[r.iw]))
      throw std::runtime_error("mode table record inconsistent with ladder: " + path);
    if (!seen.emplace(r.n, r.iw).second)
      throw std::runtime_error("duplicate (n, omega) record in mode table: " + path);
  }
  return t;
}

void write_snapshot(const FieldState& st, const KerrBackground& bg,
                    const std::string& path) {
  Writer w(path);
  w.bytes(kSnapMagic, 4);
  w.f64(bg.M);
  w.f64(bg.a);
  w.i32(bg.k);
  w.f64(st.time);
  w.u64(st.nu());
  w.u64(st.nc());
  w.u8(st.has_planes() ? 1 : 0);
  w.f64v(st.u_grid);
  w.f64v(st.costheta_grid);
  w.cxv(st.psi1);
  w.cxv(st.psi2);
  if (st.has_planes()) {
    w.cxv(st.du1);
    w.cxv(st.dc1);
  }
  if (!w.f.good()) throw std::runtime_error("write failed: " + path);
}

Snapshot read_snapshot(const std::string& path) {
  Reader rd(path);
  char magic[4];
  rd.bytes(magic, 4);
  if (std::memcmp(magic, kSnapMagic, 4) != 0)
    throw std::runtime_error("not a field snapshot file: " + path);
  const double M = rd.f64();
  const double a = rd.f64();
  const int k = rd.i32();
  Snapshot s;
  s.bg = KerrBackground(M, a, k);
  s.state.k = k;
  s.state.time = rd.f64();
  const std::uint64_t nu = rd.u64();
  const std::uint64_t nc = rd.u64();
  if (nu > kMaxCount || nc > kMaxCount || nu * nc > kMaxCount)
    throw std::runtime_error("corrupt snapshot dimensions: " + path);
  const bool planes = rd.u8() != 0;
  s.state.u_grid = rd.f64v(nu);
  s.state.costheta_grid = rd.f64v(nc);
  s.state.psi1 = rd.cxv(nu * nc);
  s.state.psi2 = rd.cxv(nu * nc);
  if (planes) {
    s.state.du1 = rd.cxv(nu * nc);
    s.state.dc1 = rd.cxv(nu * nc);
  }
  validate_state(s.state);
  return s;
}

}  // namespace kerr
