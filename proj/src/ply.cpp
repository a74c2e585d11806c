#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "sparsear/dataset.hpp"
#include "sparsear/error.hpp"

namespace sparsear {

namespace fs = std::filesystem;

namespace {

enum class ScalarType { kInt8, kUInt8, kInt16, kUInt16, kInt32, kUInt32, kFloat32, kFloat64 };

ScalarType parse_scalar(const std::string& name) {
  if (name == "char" || name == "int8") return ScalarType::kInt8;
  if (name == "uchar" || name == "uint8") return ScalarType::kUInt8;
  if (name == "short" || name == "int16") return ScalarType::kInt16;
  if (name == "ushort" || name == "uint16") return ScalarType::kUInt16;
  if (name == "int" || name == "int32") return ScalarType::kInt32;
  if (name == "uint" || name == "uint32") return ScalarType::kUInt32;
  if (name == "float" || name == "float32") return ScalarType::kFloat32;
  if (name == "double" || name == "float64") return ScalarType::kFloat64;
  throw PlyFormatError("ply: unknown scalar type '" + name + "'");
}

std::size_t scalar_size(ScalarType t) {
  switch (t) {
    case ScalarType::kInt8:
    case ScalarType::kUInt8:
      return 1;
    case ScalarType::kInt16:
    case ScalarType::kUInt16:
      return 2;
    case ScalarType::kInt32:
    case ScalarType::kUInt32:
    case ScalarType::kFloat32:
      return 4;
    case ScalarType::kFloat64:
      return 8;
  }
  return 0;
}

struct Property {
  std::string name;
  ScalarType type{};
  bool is_list = false;
  ScalarType count_type{};
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;
};

struct Header {
  bool binary = false;
  std::vector<Element> elements;
};

Header read_header(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.substr(0, 3) != "ply") {
    throw PlyFormatError("ply: missing magic");
  }
  Header h;
  bool have_format = false;
  while (true) {
    if (!std::getline(in, line)) throw PlyFormatError("ply: header not terminated");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "end_header") break;
    if (word.empty() || word == "comment" || word == "obj_info") continue;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "ascii") {
        h.binary = false;
      } else if (fmt == "binary_little_endian") {
        h.binary = true;
      } else {
        throw PlyFormatError("ply: unsupported format '" + fmt + "'");
      }
      have_format = true;
    } else if (word == "element") {
      Element e;
      long long count = -1;
      ls >> e.name >> count;
      if (!ls || count < 0) throw PlyFormatError("ply: malformed element line: " + line);
      e.count = static_cast<std::size_t>(count);
      h.elements.push_back(std::move(e));
    } else if (word == "property") {
      if (h.elements.empty()) throw PlyFormatError("ply: property before element");
      Property p;
      std::string type;
      ls >> type;
      if (type == "list") {
        std::string count_type;
        std::string item_type;
        ls >> count_type >> item_type >> p.name;
        p.is_list = true;
        p.count_type = parse_scalar(count_type);
        p.type = parse_scalar(item_type);
      } else {
        p.type = parse_scalar(type);
        ls >> p.name;
      }
      if (!ls || p.name.empty()) throw PlyFormatError("ply: malformed property line: " + line);
      h.elements.back().properties.push_back(std::move(p));
    } else {
      throw PlyFormatError("ply: unexpected header line: " + line);
    }
  }
  if (!have_format) throw PlyFormatError("ply: missing format line");
  return h;
}

/// Pulls scalar values from either encoding.
class ValueReader {
 public:
  ValueReader(std::istream& in, bool binary) : in_(in), binary_(binary) {}

  double read(ScalarType t) {
    if (!binary_) {
      double v = 0.0;
      if (!(in_ >> v)) throw PlyFormatError("ply: truncated or malformed ascii body");
      return v;
    }
    unsigned char buf[8];
    const std::size_t n = scalar_size(t);
    if (!in_.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n))) {
      throw PlyFormatError("ply: truncated binary body");
    }
    switch (t) {
      case ScalarType::kInt8:
        return static_cast<double>(static_cast<std::int8_t>(buf[0]));
      case ScalarType::kUInt8:
        return buf[0];
      case ScalarType::kInt16:
        return load<std::int16_t>(buf);
      case ScalarType::kUInt16:
        return load<std::uint16_t>(buf);
      case ScalarType::kInt32:
        return load<std::int32_t>(buf);
      case ScalarType::kUInt32:
        return load<std::uint32_t>(buf);
      case ScalarType::kFloat32:
        return load<float>(buf);
      case ScalarType::kFloat64:
        return load<double>(buf);
    }
    return 0.0;
  }

 private:
  template <class T>
  static double load(const unsigned char* buf) {
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return static_cast<double>(v);
  }

  std::istream& in_;
  bool binary_;
};

SurfaceMesh read_ply(const fs::path& path, bool want_faces) {
  if (!fs::exists(path)) throw MissingFileError(path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const Header header = read_header(in);
  ValueReader reader(in, header.binary);

  SurfaceMesh mesh;
  bool saw_vertex = false;
  for (const Element& e : header.elements) {
    const bool is_vertex = e.name == "vertex";
    const bool is_face = e.name == "face";
    int ix = -1, iy = -1, iz = -1, ir = -1, ig = -1, ib = -1, iface = -1;
    for (std::size_t p = 0; p < e.properties.size(); ++p) {
      const auto& name = e.properties[p].name;
      const int pi = static_cast<int>(p);
      if (name == "x") ix = pi;
      if (name == "y") iy = pi;
      if (name == "z") iz = pi;
      if (name == "red") ir = pi;
      if (name == "green") ig = pi;
      if (name == "blue") ib = pi;
      if ((name == "vertex_indices" || name == "vertex_index") && e.properties[p].is_list) {
        iface = pi;
      }
    }
    if (is_vertex) {
      if (ix < 0 || iy < 0 || iz < 0) throw PlyFormatError("ply: vertex element lacks x/y/z");
      saw_vertex = true;
      mesh.vertices.points.reserve(e.count);
    }
    const bool colors = is_vertex && ir >= 0 && ig >= 0 && ib >= 0;
    std::vector<double> scalars(e.properties.size());
    std::vector<int> list;
    for (std::size_t i = 0; i < e.count; ++i) {
      for (std::size_t p = 0; p < e.properties.size(); ++p) {
        const Property& prop = e.properties[p];
        if (!prop.is_list) {
          scalars[p] = reader.read(prop.type);
          continue;
        }
        const double count = reader.read(prop.count_type);
        if (count < 0 || count > 1e6) throw PlyFormatError("ply: bad list length");
        list.clear();
        for (int c = 0; c < static_cast<int>(count); ++c) {
          list.push_back(static_cast<int>(reader.read(prop.type)));
        }
        if (is_face && static_cast<int>(p) == iface && want_faces) {
          // Fan-triangulate polygons.
          for (std::size_t c = 2; c < list.size(); ++c) {
            mesh.triangles.push_back({list[0], list[c - 1], list[c]});
          }
        }
      }
      if (is_vertex) {
        Vec3 v(scalars[static_cast<std::size_t>(ix)], scalars[static_cast<std::size_t>(iy)],
               scalars[static_cast<std::size_t>(iz)]);
        if (!v.allFinite()) throw PlyFormatError("ply: non-finite vertex coordinate");
        mesh.vertices.points.push_back(v);
        if (colors) {
          mesh.vertices.colors.push_back({static_cast<std::uint8_t>(scalars[static_cast<std::size_t>(ir)]),
                                          static_cast<std::uint8_t>(scalars[static_cast<std::size_t>(ig)]),
                                          static_cast<std::uint8_t>(scalars[static_cast<std::size_t>(ib)])});
        }
      }
    }
  }
  if (!saw_vertex) throw PlyFormatError("ply: no vertex element");
  if (want_faces) {
    try {
      mesh.validate();
    } catch (const InvalidInputError& e) {
      throw PlyFormatError(std::string("ply: ") + e.what());
    }
  }
  return mesh;
}

void write_ply(const SurfaceMesh& mesh, const fs::path& path, PlyEncoding encoding) {
  const PointCloud& cloud = mesh.vertices;
  const bool colors = cloud.has_colors() && cloud.colors.size() == cloud.points.size();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  const bool binary = encoding == PlyEncoding::kBinaryLittleEndian;
  out << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n";
  out << "element vertex " << cloud.size() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  if (colors) out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  if (!mesh.triangles.empty()) {
    out << "element face " << mesh.triangles.size() << "\n";
    out << "property list uchar int vertex_indices\n";
  }
  out << "end_header\n";
  if (binary) {
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const Vec3& p = cloud.points[i];
      out.write(reinterpret_cast<const char*>(p.data()), 3 * sizeof(double));
      if (colors) out.write(reinterpret_cast<const char*>(cloud.colors[i].data()), 3);
    }
    for (const auto& t : mesh.triangles) {
      const unsigned char n = 3;
      out.write(reinterpret_cast<const char*>(&n), 1);
      const std::int32_t idx[3] = {t[0], t[1], t[2]};
      out.write(reinterpret_cast<const char*>(idx), sizeof(idx));
    }
  } else {
    out.precision(std::numeric_limits<double>::max_digits10);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const Vec3& p = cloud.points[i];
      out << p.x() << ' ' << p.y() << ' ' << p.z();
      if (colors) {
        out << ' ' << int(cloud.colors[i][0]) << ' ' << int(cloud.colors[i][1]) << ' '
            << int(cloud.colors[i][2]);
      }
      out << '\n';
    }
    for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

PointCloud load_pointcloud_ply(const fs::path& path) { return read_ply(path, false).vertices; }

void save_pointcloud_ply(const PointCloud& cloud, const fs::path& path, PlyEncoding encoding) {
  write_ply(SurfaceMesh{cloud, {}}, path, encoding);
}

SurfaceMesh load_mesh_ply(const fs::path& path) { return read_ply(path, true); }

void save_mesh_ply(const SurfaceMesh& mesh, const fs::path& path, PlyEncoding encoding) {
  mesh.validate();
  write_ply(mesh, path, encoding);
}

}  // namespace sparsear
