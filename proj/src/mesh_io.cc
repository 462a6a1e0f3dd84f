// Copyright 2026 The dexgrasp Authors
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

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>

#include "dexgrasp/mesh.h"

namespace dexgrasp {
namespace {

std::string Lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string Extension(const std::string& path) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return "";
  return Lowercase(path.substr(dot + 1));
}

void FanTriangulate(const std::vector<int>& polygon, std::vector<Face>& faces) {
  for (size_t k = 1; k + 1 < polygon.size(); ++k) {
    faces.push_back({polygon[0], polygon[k], polygon[k + 1]});
  }
}

// Resolves a 1-based (or negative, relative) OBJ index to 0-based.
int ObjIndex(const std::string& token, int vertex_count) {
  const std::string head = token.substr(0, token.find('/'));
  const int idx = std::stoi(head);
  if (idx > 0) return idx - 1;
  if (idx < 0) return vertex_count + idx;
  throw Error("OBJ face index 0 is invalid");
}

struct ObjContent {
  std::vector<Vec3> vertices;
  std::vector<std::pair<std::string, std::vector<Face>>> groups;
};

ObjContent ReadObj(std::istream& in) {
  ObjContent content;
  content.groups.emplace_back("", std::vector<Face>{});
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    try {
      if (tag == "v") {
        Vec3 p;
        if (!(ls >> p.x() >> p.y() >> p.z())) throw Error("bad vertex");
        content.vertices.push_back(p);
      } else if (tag == "f") {
        std::vector<int> polygon;
        std::string token;
        while (ls >> token) {
          polygon.push_back(
              ObjIndex(token, static_cast<int>(content.vertices.size())));
        }
        if (polygon.size() < 3) throw Error("face with fewer than 3 vertices");
        FanTriangulate(polygon, content.groups.back().second);
      } else if (tag == "g" || tag == "o") {
        std::string name;
        ls >> name;
        if (content.groups.back().second.empty()) {
          content.groups.back().first = name;
        } else {
          content.groups.emplace_back(name, std::vector<Face>{});
        }
      }
    } catch (const std::exception& e) {
      throw Error("OBJ line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return content;
}

TriMesh ParseOff(std::istream& in) {
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
  }
  size_t pos = 0;
  auto next = [&]() -> const std::string& {
    if (pos >= tokens.size()) throw Error("truncated OFF file");
    return tokens[pos++];
  };
  std::string header = next();
  if (header.rfind("OFF", 0) != 0) throw Error("missing OFF header");
  if (header.size() > 3) {
    // "OFF8 0 0" style headers glue the counts to the keyword.
    tokens[--pos] = header.substr(3);
  }
  const int nv = std::stoi(next());
  const int nf = std::stoi(next());
  next();  // edge count
  std::vector<Vec3> vertices(nv);
  for (auto& v : vertices) {
    v.x() = std::stod(next());
    v.y() = std::stod(next());
    v.z() = std::stod(next());
  }
  std::vector<Face> faces;
  for (int i = 0; i < nf; ++i) {
    const int n = std::stoi(next());
    std::vector<int> polygon(n);
    for (int& idx : polygon) idx = std::stoi(next());
    FanTriangulate(polygon, faces);
  }
  return TriMesh(std::move(vertices), std::move(faces));
}

TriMesh FromSoup(const std::vector<Vec3>& corners) {
  // Welds exactly coincident corners so that the result has connectivity.
  std::map<std::array<double, 3>, int> index;
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  for (size_t i = 0; i + 2 < corners.size(); i += 3) {
    Face f;
    for (int k = 0; k < 3; ++k) {
      const Vec3& p = corners[i + k];
      auto [it, inserted] = index.try_emplace({p.x(), p.y(), p.z()},
                                              static_cast<int>(vertices.size()));
      if (inserted) vertices.push_back(p);
      f[k] = it->second;
    }
    faces.push_back(f);
  }
  return TriMesh(std::move(vertices), std::move(faces));
}

TriMesh ParseStl(const std::string& bytes) {
  std::vector<Vec3> corners;
  const bool ascii_header = bytes.rfind("solid", 0) == 0 &&
                            bytes.find("facet") != std::string::npos;
  if (ascii_header) {
    std::istringstream in(bytes);
    std::string tok;
    while (in >> tok) {
      if (tok == "vertex") {
        Vec3 p;
        in >> p.x() >> p.y() >> p.z();
        corners.push_back(p);
      }
    }
  } else {
    if (bytes.size() < 84) throw Error("truncated binary STL");
    uint32_t count = 0;
    std::memcpy(&count, bytes.data() + 80, 4);
    if (bytes.size() < 84 + 50ull * count) throw Error("truncated binary STL");
    for (uint32_t i = 0; i < count; ++i) {
      const char* rec = bytes.data() + 84 + 50ull * i;
      for (int k = 0; k < 3; ++k) {
        float xyz[3];
        std::memcpy(xyz, rec + 12 + 12 * k, 12);
        corners.emplace_back(xyz[0], xyz[1], xyz[2]);
      }
    }
  }
  return FromSoup(corners);
}

void WriteVertex(std::ostream& out, const Vec3& v) {
  out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
}

}  // namespace

TriMesh ParseObj(std::istream& in) {
  ObjContent content = ReadObj(in);
  std::vector<Face> faces;
  for (auto& [name, group_faces] : content.groups) {
    faces.insert(faces.end(), group_faces.begin(), group_faces.end());
  }
  return TriMesh(std::move(content.vertices), std::move(faces));
}

TriMesh LoadMesh(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open mesh file: " + path);
  const std::string ext = Extension(path);
  TriMesh mesh;
  try {
    if (ext == "obj") {
      mesh = ParseObj(in);
    } else if (ext == "off") {
      mesh = ParseOff(in);
    } else if (ext == "stl") {
      std::stringstream buffer;
      buffer << in.rdbuf();
      mesh = ParseStl(buffer.str());
    } else {
      throw Error("unsupported mesh format '" + ext + "'");
    }
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(path + ": malformed mesh (" + e.what() + ")");
  }
  if (mesh.empty()) throw Error(path + ": no faces left after cleanup");
  return mesh;
}

void SaveObj(const TriMesh& mesh, const std::string& path) {
  const ObjGroup group{"", mesh};
  SaveObjGroups(std::span<const ObjGroup>(&group, 1), path);
}

void SaveObjGroups(std::span<const ObjGroup> groups, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << std::setprecision(17);
  int base = 1;
  for (const ObjGroup& g : groups) {
    if (!g.name.empty()) out << "g " << g.name << '\n';
    for (const Vec3& v : g.mesh.vertices()) WriteVertex(out, v);
    for (const Face& f : g.mesh.faces()) {
      out << "f " << f[0] + base << ' ' << f[1] + base << ' ' << f[2] + base
          << '\n';
    }
    base += g.mesh.num_vertices();
  }
  if (!out) throw Error("failed writing " + path);
}

std::vector<ObjGroup> LoadObjGroups(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open mesh file: " + path);
  ObjContent content = ReadObj(in);
  std::vector<ObjGroup> groups;
  for (auto& [name, faces] : content.groups) {
    if (faces.empty()) continue;
    // Compact each group onto the vertices it references, in file order.
    std::map<int, int> remap;
    for (const Face& f : faces) {
      for (int idx : f) {
        if (idx < 0 || idx >= static_cast<int>(content.vertices.size())) {
          throw Error(path + ": face index out of range");
        }
        remap.emplace(idx, 0);
      }
    }
    std::vector<Vec3> vertices;
    for (auto& [idx, compact] : remap) {
      compact = static_cast<int>(vertices.size());
      vertices.push_back(content.vertices[idx]);
    }
    for (Face& f : faces) {
      for (int& idx : f) idx = remap.at(idx);
    }
    groups.push_back({name, TriMesh(std::move(vertices), std::move(faces))});
  }
  return groups;
}

}  // namespace dexgrasp
