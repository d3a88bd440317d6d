#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "uwsr/cloud.hpp"
#include "uwsr/errors.hpp"
#include "uwsr/isosurface.hpp"
#include "uwsr/orientation.hpp"

namespace uwsr {

struct PointFile {
  PointList<3> points;
  std::optional<PointList<3>> normals;
};

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<long long> parse_int(std::string_view s) {
  long long v = 0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Splits into lines, tracking 1-based line numbers.
class LineReader {
public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    const std::size_t end = text_.find('\n', pos_);
    const std::size_t stop = end == std::string_view::npos ? text_.size() : end;
    line = text_.substr(pos_, stop - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = end == std::string_view::npos ? text_.size() : end + 1;
    ++line_no_;
    return true;
  }

  std::size_t line() const noexcept { return line_no_; }
  std::size_t offset() const noexcept { return pos_; }

private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

[[noreturn]] inline void fail_at(const std::string& source, std::size_t line, const std::string& what) {
  throw ParseError(source + ":" + std::to_string(line) + ": " + what);
}

enum class PlyType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

inline std::optional<PlyType> ply_type(std::string_view s) {
  if (s == "char" || s == "int8") return PlyType::Int8;
  if (s == "uchar" || s == "uint8") return PlyType::UInt8;
  if (s == "short" || s == "int16") return PlyType::Int16;
  if (s == "ushort" || s == "uint16") return PlyType::UInt16;
  if (s == "int" || s == "int32") return PlyType::Int32;
  if (s == "uint" || s == "uint32") return PlyType::UInt32;
  if (s == "float" || s == "float32") return PlyType::Float32;
  if (s == "double" || s == "float64") return PlyType::Float64;
  return std::nullopt;
}

inline std::size_t ply_size(PlyType t) {
  switch (t) {
    case PlyType::Int8:
    case PlyType::UInt8: return 1;
    case PlyType::Int16:
    case PlyType::UInt16: return 2;
    case PlyType::Int32:
    case PlyType::UInt32:
    case PlyType::Float32: return 4;
    default: return 8;
  }
}

template <class T>
T load_le(const unsigned char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

inline double ply_read_binary(PlyType t, const unsigned char* p) {
  switch (t) {
    case PlyType::Int8: return load_le<std::int8_t>(p);
    case PlyType::UInt8: return load_le<std::uint8_t>(p);
    case PlyType::Int16: return load_le<std::int16_t>(p);
    case PlyType::UInt16: return load_le<std::uint16_t>(p);
    case PlyType::Int32: return load_le<std::int32_t>(p);
    case PlyType::UInt32: return load_le<std::uint32_t>(p);
    case PlyType::Float32: return load_le<float>(p);
    default: return load_le<double>(p);
  }
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::Float32;
  bool list = false;
  PlyType count_type = PlyType::UInt8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

struct PlyData {
  std::vector<std::vector<double>> vertex_columns;
  std::vector<std::string> vertex_names;
  std::vector<std::vector<long long>> faces;
};

inline PlyData parse_ply(const std::string& text, const std::string& source) {
  LineReader reader(text);
  std::string_view line;
  if (!reader.next(line) || line != "ply") fail_at(source, 1, "missing 'ply' magic");
  bool ascii = false, binary = false, ended = false;
  std::vector<PlyElement> elements;
  while (reader.next(line)) {
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "format") {
      if (tok.size() < 2) fail_at(source, reader.line(), "malformed format line");
      if (tok[1] == "ascii") ascii = true;
      else if (tok[1] == "binary_little_endian") binary = true;
      else fail_at(source, reader.line(), "unsupported PLY format '" + std::string(tok[1]) + "'");
    } else if (tok[0] == "element") {
      if (tok.size() != 3) fail_at(source, reader.line(), "malformed element line");
      const auto n = parse_int(tok[2]);
      if (!n || *n < 0) fail_at(source, reader.line(), "invalid element count");
      elements.push_back({std::string(tok[1]), static_cast<std::size_t>(*n), {}});
    } else if (tok[0] == "property") {
      if (elements.empty()) fail_at(source, reader.line(), "property before any element");
      PlyProperty p;
      if (tok.size() == 5 && tok[1] == "list") {
        const auto ct = ply_type(tok[2]);
        const auto vt = ply_type(tok[3]);
        if (!ct || !vt) fail_at(source, reader.line(), "unknown list property type");
        p.list = true;
        p.count_type = *ct;
        p.type = *vt;
        p.name = std::string(tok[4]);
      } else if (tok.size() == 3) {
        const auto t = ply_type(tok[1]);
        if (!t) fail_at(source, reader.line(), "unknown property type '" + std::string(tok[1]) + "'");
        p.type = *t;
        p.name = std::string(tok[2]);
      } else {
        fail_at(source, reader.line(), "malformed property line");
      }
      elements.back().properties.push_back(p);
    } else if (tok[0] == "end_header") {
      ended = true;
      break;
    } else {
      fail_at(source, reader.line(), "unexpected header keyword '" + std::string(tok[0]) + "'");
    }
  }
  if (!ended) fail_at(source, reader.line(), "missing end_header");
  if (!ascii && !binary) fail_at(source, reader.line(), "missing format line");

  PlyData data;
  const PlyElement* vertex = nullptr;
  for (const auto& e : elements)
    if (e.name == "vertex") vertex = &e;
  if (!vertex) fail_at(source, reader.line(), "no vertex element");
  for (const auto& p : vertex->properties) data.vertex_names.push_back(p.name);
  data.vertex_columns.assign(vertex->properties.size(), {});

  auto store = [&](const PlyElement& e, std::size_t prop, std::vector<double>&& values) {
    if (&e == vertex) {
      data.vertex_columns[prop].push_back(values.empty() ? 0.0 : values.front());
    } else if ((e.name == "face") && (e.properties[prop].name == "vertex_indices" || e.properties[prop].name == "vertex_index")) {
      std::vector<long long> f;
      f.reserve(values.size());
      for (double v : values) f.push_back(static_cast<long long>(v));
      data.faces.push_back(std::move(f));
    }
  };

  if (ascii) {
    for (const auto& e : elements) {
      for (std::size_t r = 0; r < e.count; ++r) {
        if (!reader.next(line)) fail_at(source, reader.line() + 1, "unexpected end of data in element '" + e.name + "'");
        const auto tok = split_ws(line);
        std::size_t t = 0;
        for (std::size_t pi = 0; pi < e.properties.size(); ++pi) {
          const auto& p = e.properties[pi];
          std::vector<double> values;
          std::size_t n = 1;
          if (p.list) {
            if (t >= tok.size()) fail_at(source, reader.line(), "missing list count");
            const auto c = parse_int(tok[t++]);
            if (!c || *c < 0) fail_at(source, reader.line(), "invalid list count");
            n = static_cast<std::size_t>(*c);
          }
          for (std::size_t i = 0; i < n; ++i) {
            if (t >= tok.size()) fail_at(source, reader.line(), "too few values for element '" + e.name + "'");
            const auto v = parse_double(tok[t++]);
            if (!v) fail_at(source, reader.line(), "invalid number '" + std::string(tok[t - 1]) + "'");
            values.push_back(*v);
          }
          store(e, pi, std::move(values));
        }
        if (t != tok.size()) fail_at(source, reader.line(), "too many values for element '" + e.name + "'");
      }
    }
  } else {
    const auto* bytes = reinterpret_cast<const unsigned char*>(text.data());
    std::size_t pos = reader.offset();
    auto need = [&](std::size_t n) {
      if (pos + n > text.size())
        throw ParseError(source + ": byte offset " + std::to_string(pos) + ": unexpected end of binary data");
    };
    for (const auto& e : elements) {
      for (std::size_t r = 0; r < e.count; ++r) {
        for (std::size_t pi = 0; pi < e.properties.size(); ++pi) {
          const auto& p = e.properties[pi];
          std::size_t n = 1;
          if (p.list) {
            need(ply_size(p.count_type));
            const double c = ply_read_binary(p.count_type, bytes + pos);
            pos += ply_size(p.count_type);
            if (c < 0) throw ParseError(source + ": byte offset " + std::to_string(pos) + ": negative list count");
            n = static_cast<std::size_t>(c);
          }
          std::vector<double> values(n);
          need(n * ply_size(p.type));
          for (std::size_t i = 0; i < n; ++i) {
            values[i] = ply_read_binary(p.type, bytes + pos);
            pos += ply_size(p.type);
          }
          store(e, pi, std::move(values));
        }
      }
    }
  }
  return data;
}

inline int column(const PlyData& d, std::string_view name) {
  for (std::size_t i = 0; i < d.vertex_names.size(); ++i)
    if (d.vertex_names[i] == name) return static_cast<int>(i);
  return -1;
}

}  // namespace detail

// "x y z [nx ny nz]" per line; blank lines and '#' comments are skipped.
inline PointFile parse_xyz(const std::string& text, const std::string& source = "<xyz>") {
  PointFile out;
  PointList<3> normals;
  std::optional<bool> with_normals;
  detail::LineReader reader(text);
  std::string_view line;
  while (reader.next(line)) {
    const auto tok = detail::split_ws(line);
    if (tok.empty() || tok[0].front() == '#') continue;
    if (tok.size() != 3 && tok.size() != 6)
      detail::fail_at(source, reader.line(), "expected 3 or 6 numbers, found " + std::to_string(tok.size()));
    const bool has_n = tok.size() == 6;
    if (with_normals && *with_normals != has_n) detail::fail_at(source, reader.line(), "inconsistent column count");
    with_normals = has_n;
    double v[6];
    for (std::size_t i = 0; i < tok.size(); ++i) {
      const auto d = detail::parse_double(tok[i]);
      if (!d) detail::fail_at(source, reader.line(), "invalid number '" + std::string(tok[i]) + "'");
      v[i] = *d;
    }
    out.points.emplace_back(v[0], v[1], v[2]);
    if (has_n) normals.emplace_back(v[3], v[4], v[5]);
  }
  if (out.points.empty()) throw ParseError(source + ": no points");
  if (with_normals && *with_normals) out.normals = std::move(normals);
  return out;
}

inline PointFile parse_ply_points(const std::string& text, const std::string& source = "<ply>") {
  const auto d = detail::parse_ply(text, source);
  const int x = detail::column(d, "x"), y = detail::column(d, "y"), z = detail::column(d, "z");
  if (x < 0 || y < 0) throw ParseError(source + ": vertex element lacks x/y properties");
  PointFile out;
  const std::size_t n = d.vertex_columns[x].size();
  for (std::size_t i = 0; i < n; ++i)
    out.points.emplace_back(d.vertex_columns[x][i], d.vertex_columns[y][i], z >= 0 ? d.vertex_columns[z][i] : 0.0);
  const int nx = detail::column(d, "nx"), ny = detail::column(d, "ny"), nz = detail::column(d, "nz");
  if (nx >= 0 && ny >= 0) {
    PointList<3> normals;
    for (std::size_t i = 0; i < n; ++i)
      normals.emplace_back(d.vertex_columns[nx][i], d.vertex_columns[ny][i], nz >= 0 ? d.vertex_columns[nz][i] : 0.0);
    out.normals = std::move(normals);
  }
  if (out.points.empty()) throw ParseError(source + ": no points");
  for (const auto& p : out.points)
    if (!p.allFinite()) throw ParseError(source + ": non-finite vertex coordinate");
  return out;
}

inline PointFile load_points(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  if (detail::lower_extension(path) == ".ply") return parse_ply_points(text, path.string());
  return parse_xyz(text, path.string());
}

inline Mesh parse_obj(const std::string& text, const std::string& source = "<obj>") {
  Mesh m;
  detail::LineReader reader(text);
  std::string_view line;
  while (reader.next(line)) {
    const auto tok = detail::split_ws(line);
    if (tok.empty() || tok[0].front() == '#') continue;
    if (tok[0] == "v") {
      if (tok.size() < 4) detail::fail_at(source, reader.line(), "vertex needs 3 coordinates");
      double v[3];
      for (int i = 0; i < 3; ++i) {
        const auto d = detail::parse_double(tok[i + 1]);
        if (!d) detail::fail_at(source, reader.line(), "invalid number '" + std::string(tok[i + 1]) + "'");
        v[i] = *d;
      }
      m.vertices.emplace_back(v[0], v[1], v[2]);
    } else if (tok[0] == "f") {
      if (tok.size() < 4) detail::fail_at(source, reader.line(), "face needs at least 3 vertices");
      std::vector<int> idx;
      for (std::size_t i = 1; i < tok.size(); ++i) {
        const auto head = tok[i].substr(0, tok[i].find('/'));
        const auto k = detail::parse_int(head);
        if (!k || *k == 0) detail::fail_at(source, reader.line(), "invalid face index '" + std::string(tok[i]) + "'");
        const long long n = static_cast<long long>(m.vertices.size());
        const long long r = *k > 0 ? *k - 1 : n + *k;
        if (r < 0 || r >= n) detail::fail_at(source, reader.line(), "face index out of range");
        idx.push_back(static_cast<int>(r));
      }
      for (std::size_t i = 1; i + 1 < idx.size(); ++i) m.triangles.push_back({idx[0], idx[i], idx[i + 1]});
    }
  }
  return m;
}

inline Mesh parse_ply_mesh(const std::string& text, const std::string& source = "<ply>") {
  const auto d = detail::parse_ply(text, source);
  const int x = detail::column(d, "x"), y = detail::column(d, "y"), z = detail::column(d, "z");
  if (x < 0 || y < 0 || z < 0) throw ParseError(source + ": vertex element lacks x/y/z properties");
  Mesh m;
  for (std::size_t i = 0; i < d.vertex_columns[x].size(); ++i)
    m.vertices.emplace_back(d.vertex_columns[x][i], d.vertex_columns[y][i], d.vertex_columns[z][i]);
  const long long n = static_cast<long long>(m.vertices.size());
  for (const auto& f : d.faces) {
    if (f.size() < 3) throw ParseError(source + ": face with fewer than 3 vertices");
    for (long long v : f)
      if (v < 0 || v >= n) throw ParseError(source + ": face index out of range");
    for (std::size_t i = 1; i + 1 < f.size(); ++i)
      m.triangles.push_back({static_cast<int>(f[0]), static_cast<int>(f[i]), static_cast<int>(f[i + 1])});
  }
  return m;
}

inline Mesh load_mesh(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  const std::string ext = detail::lower_extension(path);
  if (ext == ".ply") return parse_ply_mesh(text, path.string());
  if (ext == ".obj") return parse_obj(text, path.string());
  throw ParseError(path.string() + ": unsupported mesh format (expected .obj or .ply)");
}

namespace detail {

inline std::ostringstream precise_stream() {
  std::ostringstream os;
  os << std::setprecision(17);
  return os;
}

}  // namespace detail

inline std::string to_xyz(const PointList<3>& points, const PointList<3>* normals = nullptr) {
  auto os = detail::precise_stream();
  for (std::size_t i = 0; i < points.size(); ++i) {
    os << points[i].x() << ' ' << points[i].y() << ' ' << points[i].z();
    if (normals) os << ' ' << (*normals)[i].x() << ' ' << (*normals)[i].y() << ' ' << (*normals)[i].z();
    os << '\n';
  }
  return os.str();
}

// ASCII PLY with normals, area elements and a degeneracy flag; 2-D clouds are
// written in the z = 0 plane.
template <int Dim>
std::string to_oriented_ply(const OrientedCloud<Dim>& cloud) {
  auto os = detail::precise_stream();
  os << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
     << "\nproperty double x\nproperty double y\nproperty double z\n"
        "property double nx\nproperty double ny\nproperty double nz\n"
        "property double area\nproperty uchar degenerate\nend_header\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    Eigen::Vector3d p = Eigen::Vector3d::Zero(), n = Eigen::Vector3d::Zero();
    p.head<Dim>() = cloud.points[i];
    n.head<Dim>() = cloud.normals[i];
    os << p.x() << ' ' << p.y() << ' ' << p.z() << ' ' << n.x() << ' ' << n.y() << ' ' << n.z() << ' '
       << cloud.areas[i] << ' ' << (cloud.degenerate[i] ? 1 : 0) << '\n';
  }
  return os.str();
}

inline std::string to_obj(const Mesh& mesh) {
  auto os = detail::precise_stream();
  for (const auto& v : mesh.vertices) os << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : mesh.triangles) os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  return os.str();
}

inline std::string to_ply(const Mesh& mesh) {
  auto os = detail::precise_stream();
  os << "ply\nformat ascii 1.0\nelement vertex " << mesh.vertices.size()
     << "\nproperty double x\nproperty double y\nproperty double z\nelement face " << mesh.triangles.size()
     << "\nproperty list uchar int vertex_indices\nend_header\n";
  for (const auto& v : mesh.vertices) os << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : mesh.triangles) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  return os.str();
}

inline std::string to_csv(const std::vector<Polyline>& lines) {
  auto os = detail::precise_stream();
  os << "contour,vertex,x,y,closed\n";
  for (std::size_t c = 0; c < lines.size(); ++c)
    for (std::size_t i = 0; i < lines[c].points.size(); ++i)
      os << c << ',' << i << ',' << lines[c].points[i].x() << ',' << lines[c].points[i].y() << ','
         << (lines[c].closed ? 1 : 0) << '\n';
  return os.str();
}

// Contours plus the oriented input points with short normal ticks.
inline std::string to_svg(const std::vector<Polyline>& lines, const OrientedCloud<2>* cloud = nullptr) {
  Eigen::Vector2d lo = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector2d hi = -lo;
  for (const auto& l : lines)
    for (const auto& p : l.points) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
  if (cloud)
    for (const auto& p : cloud->points) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
  if (!lo.allFinite()) {
    lo.setZero();
    hi.setOnes();
  }
  const double extent = std::max((hi - lo).maxCoeff(), 1e-12);
  const double pad = 0.05 * extent;
  const double size = 800.0;
  const double s = size / (extent + 2 * pad);
  auto tx = [&](const Eigen::Vector2d& p) {
    return Eigen::Vector2d((p.x() - lo.x() + pad) * s, size - (p.y() - lo.y() + pad) * s);
  };
  auto os = detail::precise_stream();
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\" viewBox=\"0 0 "
     << size << ' ' << size << "\">\n";
  for (const auto& l : lines) {
    os << (l.closed ? "<polygon" : "<polyline") << " fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
    for (const auto& p : l.points) {
      const auto q = tx(p);
      os << q.x() << ',' << q.y() << ' ';
    }
    os << "\"/>\n";
  }
  if (cloud) {
    const double tick = 0.03 * extent;
    for (std::size_t i = 0; i < cloud->size(); ++i) {
      const auto a = tx(cloud->points[i]);
      const auto b = tx(cloud->points[i] + tick * cloud->normals[i]);
      os << "<circle cx=\"" << a.x() << "\" cy=\"" << a.y() << "\" r=\"2\" fill=\"steelblue\"/>"
         << "<line x1=\"" << a.x() << "\" y1=\"" << a.y() << "\" x2=\"" << b.x() << "\" y2=\"" << b.y()
         << "\" stroke=\"crimson\" stroke-width=\"1\"/>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace uwsr
