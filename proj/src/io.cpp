#include "jumpom/io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace jumpom::io {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorKind::input, "io", msg); }

std::ofstream open_out(const std::filesystem::path& file, std::ios::openmode mode = std::ios::out) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, mode | std::ios::trunc);
  if (!out) fail("cannot open " + file.string() + " for writing");
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) out.push_back(cell);
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  while (b < e && *b == ' ') ++b;
  const auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc{}) fail("not a number '" + s + "' in " + where);
  return v;
}

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is, const std::string& file) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) fail("truncated density grid " + file);
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::string path_csv(const DiscretePath& path) {
  std::ostringstream os;
  os << "t";
  for (int k = 0; k < path.dim(); ++k) os << ",x" << k + 1;
  os << ",jump_flag\n";
  std::size_t next_jump = 0;
  for (std::size_t i = 0; i < path.t.size(); ++i) {
    int flag = 0;
    while (next_jump < path.jumps.size() && path.jumps[next_jump].time <= path.t[i]) {
      flag = 1;
      ++next_jump;
    }
    os << format_double(path.t[i]);
    for (int k = 0; k < path.dim(); ++k) os << ',' << format_double(path.x(static_cast<Eigen::Index>(i), k));
    os << ',' << flag << '\n';
  }
  return os.str();
}

void write_path_csv(const std::filesystem::path& file, const DiscretePath& path) { write_text(file, path_csv(path)); }

DiscretePath read_path_csv(const std::filesystem::path& file) {
  std::istringstream is(read_text(file));
  std::string line;
  if (!std::getline(is, line)) fail("empty path file " + file.string());
  const auto header = split(line, ',');
  if (header.empty() || header[0] != "t") fail("path file " + file.string() + " must start with a 't' column");
  int dim = 0;
  for (std::size_t c = 1; c < header.size(); ++c)
    if (header[c].size() > 1 && header[c][0] == 'x') ++dim;
  if (dim == 0) fail("path file " + file.string() + " has no state columns");
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() < static_cast<std::size_t>(dim + 1)) fail("short row in " + file.string() + ": " + line);
    std::vector<double> r(static_cast<std::size_t>(dim + 1));
    for (std::size_t c = 0; c < r.size(); ++c) r[c] = parse_double(cells[c], file.string());
    rows.push_back(std::move(r));
  }
  DiscretePath p;
  p.x.resize(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    p.t.push_back(rows[i][0]);
    for (int k = 0; k < dim; ++k) p.x(static_cast<Eigen::Index>(i), k) = rows[i][static_cast<std::size_t>(k + 1)];
  }
  return p;
}

void write_density_grid(const std::filesystem::path& file, const DensityField& field) {
  auto out = open_out(file, std::ios::out | std::ios::binary);
  const SpatialGrid& g = field.grid();
  out.write("JOMG", 4);
  put<std::uint32_t>(out, 1);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.nodes));
  for (int k = 0; k < g.dim; ++k) put<double>(out, g.lo(k));
  for (int k = 0; k < g.dim; ++k) put<double>(out, g.hi(k));
  for (int k = 0; k < g.dim; ++k) put<double>(out, field.x0()(k));
  put<double>(out, field.epsilon());
  put<std::uint64_t>(out, field.slices());
  for (double t : field.times()) put<double>(out, t);
  for (std::size_t s = 0; s < field.slices(); ++s) put<double>(out, field.clipped_mass(s));
  for (std::size_t s = 0; s < field.slices(); ++s) {
    const auto& v = field.slice(s);
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  if (!out) fail("write failed for " + file.string());
}

DensityField read_density_grid(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) fail("cannot open " + file.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "JOMG", 4) != 0) fail(file.string() + " is not a density grid file");
  const auto name = file.string();
  if (get<std::uint32_t>(in, name) != 1) fail("unsupported density grid version in " + name);
  SpatialGrid g;
  g.dim = static_cast<int>(get<std::uint32_t>(in, name));
  g.nodes = static_cast<int>(get<std::uint32_t>(in, name));
  if (g.dim < 1 || g.dim > 2) fail("density grid dimension must be 1 or 2 in " + name);
  g.lo.resize(g.dim);
  g.hi.resize(g.dim);
  Vec x0(g.dim);
  for (int k = 0; k < g.dim; ++k) g.lo(k) = get<double>(in, name);
  for (int k = 0; k < g.dim; ++k) g.hi(k) = get<double>(in, name);
  for (int k = 0; k < g.dim; ++k) x0(k) = get<double>(in, name);
  const double eps = get<double>(in, name);
  const auto n = get<std::uint64_t>(in, name);
  std::vector<double> times(n), clipped(n);
  for (auto& t : times) t = get<double>(in, name);
  for (auto& c : clipped) c = get<double>(in, name);
  DensityField field(g, x0, eps);
  for (std::size_t s = 0; s < n; ++s) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(g.size()));
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!in) fail("truncated density grid " + name);
    field.push_slice(times[s], std::move(v), clipped[s]);
  }
  return field;
}

std::string density_csv(const DensityField& field, const std::vector<std::size_t>& slices) {
  const SpatialGrid& g = field.grid();
  std::ostringstream os;
  os << "t";
  for (int k = 0; k < g.dim; ++k) os << ",x" << k + 1;
  os << ",p\n";
  for (std::size_t s : slices) {
    const auto& v = field.slice(s);
    const std::string t = format_double(field.times().at(s));
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Vec x = g.node(i);
      os << t;
      for (int k = 0; k < g.dim; ++k) os << ',' << format_double(x(k));
      os << ',' << format_double(v(static_cast<Eigen::Index>(i))) << '\n';
    }
  }
  return os.str();
}

std::string marginals_csv(const std::vector<double>& times, const std::vector<Eigen::MatrixXd>& snapshots) {
  std::ostringstream os;
  const int d = snapshots.empty() ? 1 : static_cast<int>(snapshots.front().cols());
  os << "t,path";
  for (int k = 0; k < d; ++k) os << ",x" << k + 1;
  os << '\n';
  for (std::size_t s = 0; s < snapshots.size(); ++s) {
    const std::string t = format_double(times[s]);
    for (Eigen::Index p = 0; p < snapshots[s].rows(); ++p) {
      os << t << ',' << p;
      for (int k = 0; k < d; ++k) os << ',' << format_double(snapshots[s](p, k));
      os << '\n';
    }
  }
  return os.str();
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  auto out = open_out(file, std::ios::out | std::ios::binary);
  out << text;
  if (!out) fail("write failed for " + file.string());
}

std::string read_text(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) fail("cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json(const std::filesystem::path& file, const nlohmann::json& j) { write_text(file, j.dump(2) + "\n"); }

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

}  // namespace jumpom::io
