#pragma once

#include <string>

#include "nphm/tri_mesh.hpp"

namespace nphm {

/// ASCII OBJ: v / vn / f records.
void write_obj(const std::string& path, const TriMesh& mesh);
TriMesh read_obj(const std::string& path);

/// Binary little-endian PLY with float32 positions/normals and int32 faces.
void write_ply(const std::string& path, const TriMesh& mesh);
void write_ply(const std::string& path, const OrientedPointCloud& cloud);
TriMesh read_ply_mesh(const std::string& path);
OrientedPointCloud read_ply_cloud(const std::string& path);

}  // namespace nphm
