#include "nphm/mesh_io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace nphm {

namespace {

struct PlyHeader {
  Index n_vertices = 0;
  Index n_faces = 0;
  bool has_normals = false;
  std::size_t data_offset = 0;
};

PlyHeader parse_ply_header(std::ifstream& in, const std::string& path) {
  PlyHeader h;
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0)
    throw IoError("read_ply: not a PLY file: " + path);
  std::string element;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt != "binary_little_endian")
        throw IoError("read_ply: only binary_little_endian supported: " + path);
    } else if (tok == "element") {
      std::string name;
      Index count;
      ls >> name >> count;
      element = name;
      if (name == "vertex") h.n_vertices = count;
      if (name == "face") h.n_faces = count;
    } else if (tok == "property" && element == "vertex") {
      std::string type, name;
      ls >> type >> name;
      if (name == "nx") h.has_normals = true;
    } else if (tok == "end_header") {
      break;
    }
  }
  h.data_offset = static_cast<std::size_t>(in.tellg());
  return h;
}

void write_ply_impl(const std::string& path, const MatX3& points, const MatX3* normals,
                    const MatX3i* faces) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("write_ply: cannot open " + path);
  out << "ply\nformat binary_little_endian 1.0\n";
  out << "element vertex " << points.rows() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  if (normals) out << "property float nx\nproperty float ny\nproperty float nz\n";
  if (faces) {
    out << "element face " << faces->rows() << "\n";
    out << "property list uchar int vertex_indices\n";
  }
  out << "end_header\n";

  for (Index i = 0; i < points.rows(); ++i) {
    float buf[6];
    int n = 3;
    for (int k = 0; k < 3; ++k) buf[k] = static_cast<float>(points(i, k));
    if (normals) {
      for (int k = 0; k < 3; ++k) buf[3 + k] = static_cast<float>((*normals)(i, k));
      n = 6;
    }
    out.write(reinterpret_cast<const char*>(buf), n * sizeof(float));
  }
  if (faces) {
    for (Index f = 0; f < faces->rows(); ++f) {
      const unsigned char cnt = 3;
      std::int32_t idx[3] = {(*faces)(f, 0), (*faces)(f, 1), (*faces)(f, 2)};
      out.write(reinterpret_cast<const char*>(&cnt), 1);
      out.write(reinterpret_cast<const char*>(idx), sizeof(idx));
    }
  }
  if (!out) throw IoError("write_ply: write failed for " + path);
}

}  // namespace

void write_ply(const std::string& path, const TriMesh& mesh) {
  write_ply_impl(path, mesh.vertices, nullptr, &mesh.faces);
}

void write_ply(const std::string& path, const OrientedPointCloud& cloud) {
  write_ply_impl(path, cloud.points, &cloud.normals, nullptr);
}

TriMesh read_ply_mesh(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_ply: cannot open " + path);
  const PlyHeader h = parse_ply_header(in, path);

  TriMesh mesh;
  mesh.vertices.resize(h.n_vertices, 3);
  const int stride = h.has_normals ? 6 : 3;
  std::vector<float> buf(stride);
  for (Index i = 0; i < h.n_vertices; ++i) {
    in.read(reinterpret_cast<char*>(buf.data()), stride * sizeof(float));
    for (int k = 0; k < 3; ++k) mesh.vertices(i, k) = buf[k];
  }
  mesh.faces.resize(h.n_faces, 3);
  for (Index f = 0; f < h.n_faces; ++f) {
    unsigned char cnt;
    in.read(reinterpret_cast<char*>(&cnt), 1);
    if (cnt != 3) throw IoError("read_ply: non-triangle face in " + path);
    std::int32_t idx[3];
    in.read(reinterpret_cast<char*>(idx), sizeof(idx));
    mesh.faces.row(f) << idx[0], idx[1], idx[2];
  }
  if (!in) throw IoError("read_ply: truncated file " + path);
  return mesh;
}

OrientedPointCloud read_ply_cloud(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_ply: cannot open " + path);
  const PlyHeader h = parse_ply_header(in, path);

  OrientedPointCloud cloud;
  cloud.points.resize(h.n_vertices, 3);
  cloud.normals.resize(h.n_vertices, 3);
  const int stride = h.has_normals ? 6 : 3;
  std::vector<float> buf(stride);
  for (Index i = 0; i < h.n_vertices; ++i) {
    in.read(reinterpret_cast<char*>(buf.data()), stride * sizeof(float));
    for (int k = 0; k < 3; ++k) cloud.points(i, k) = buf[k];
    if (h.has_normals)
      for (int k = 0; k < 3; ++k) cloud.normals(i, k) = buf[3 + k];
    else
      cloud.normals.row(i) << 0, 0, 1;
  }
  if (!in) throw IoError("read_ply: truncated file " + path);
  // Stored normals are float32; renormalize so downstream unit checks hold.
  for (Index i = 0; i < cloud.normals.rows(); ++i) {
    const double len = cloud.normals.row(i).norm();
    if (len > 0) cloud.normals.row(i) /= len;
  }
  return cloud;
}

void write_obj(const std::string& path, const TriMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw IoError("write_obj: cannot open " + path);
  out.precision(9);
  for (Index v = 0; v < mesh.vertex_count(); ++v)
    out << "v " << mesh.vertices(v, 0) << ' ' << mesh.vertices(v, 1) << ' '
        << mesh.vertices(v, 2) << '\n';
  for (Index f = 0; f < mesh.face_count(); ++f)
    out << "f " << mesh.faces(f, 0) + 1 << ' ' << mesh.faces(f, 1) + 1 << ' '
        << mesh.faces(f, 2) + 1 << '\n';
  if (!out) throw IoError("write_obj: write failed for " + path);
}

TriMesh read_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_obj: cannot open " + path);
  std::vector<Vec3> verts;
  std::vector<Eigen::Vector3i> faces;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "v") {
      Vec3 v;
      ls >> v(0) >> v(1) >> v(2);
      verts.push_back(v);
    } else if (tok == "f") {
      Eigen::Vector3i f;
      for (int k = 0; k < 3; ++k) {
        std::string ref;
        ls >> ref;
        f(k) = std::stoi(ref.substr(0, ref.find('/'))) - 1;
      }
      faces.push_back(f);
    }
  }
  TriMesh mesh;
  mesh.vertices.resize(verts.size(), 3);
  for (std::size_t i = 0; i < verts.size(); ++i) mesh.vertices.row(i) = verts[i].transpose();
  mesh.faces.resize(faces.size(), 3);
  for (std::size_t i = 0; i < faces.size(); ++i) mesh.faces.row(i) = faces[i].transpose();
  return mesh;
}

}  // namespace nphm
