// Copyright 2026 The leafrecon Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <vector>

#include "leafrecon/core.hpp"

namespace leafrecon {

enum class CloudFormat { xyz, ply_ascii };
enum class MeshFormat { obj, ply_ascii };

/// Picks the format from the file extension (.xyz/.txt or .ply).
CloudFormat cloud_format_for(const std::filesystem::path& path);
/// Picks the format from the file extension (.obj or .ply).
MeshFormat mesh_format_for(const std::filesystem::path& path);

/// Reads "x y z [nx ny nz]" records or an ASCII PLY vertex element.
/// Parse errors carry the 1-based line number.
PointCloud load_point_cloud(const std::filesystem::path& path, CloudFormat format);

void save_point_cloud(const PointCloud& cloud, const std::filesystem::path& path,
                      CloudFormat format);

/// Writes an XYZ-with-normals file grouped by component, each group preceded
/// by a "# component <id>" comment line.
void save_labelled_normals(const PointCloud& cloud, std::span<const int> labels,
                           const std::filesystem::path& path);

void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path,
               MeshFormat format);
TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format);

}  // namespace leafrecon
