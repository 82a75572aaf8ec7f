#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "orb/mesh.hpp"

namespace orb {

struct ObjError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Wavefront OBJ subset: v, vt, f (polygons are fan-triangulated).
// Normals, materials, groups and objects are ignored.
inline MeshPrimitive parse_obj(std::istream& in) {
    MeshPrimitive mesh;
    std::vector<Vec2> file_uvs;
    std::vector<int> vertex_uv;  // uv index assigned to each vertex, -1 if none
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            double x, y, z;
            if (!(ls >> x >> y >> z))
                throw ObjError("obj line " + std::to_string(line_no) + ": bad vertex");
            mesh.vertices.push_back({x, y, z});
            vertex_uv.push_back(-1);
        } else if (tag == "vt") {
            double u, v;
            if (!(ls >> u >> v))
                throw ObjError("obj line " + std::to_string(line_no) + ": bad texcoord");
            file_uvs.push_back({u, v});
        } else if (tag == "f") {
            std::vector<int> face;
            std::string corner;
            while (ls >> corner) {
                // forms: v, v/vt, v/vt/vn, v//vn
                size_t slash = corner.find('/');
                int vi = std::stoi(corner.substr(0, slash));
                int ti = 0;
                if (slash != std::string::npos) {
                    size_t slash2 = corner.find('/', slash + 1);
                    std::string tpart = corner.substr(
                        slash + 1, slash2 == std::string::npos ? std::string::npos
                                                               : slash2 - slash - 1);
                    if (!tpart.empty()) ti = std::stoi(tpart);
                }
                int nverts = static_cast<int>(mesh.vertices.size());
                if (vi < 0) vi = nverts + vi + 1;
                if (vi < 1 || vi > nverts)
                    throw ObjError("obj line " + std::to_string(line_no) +
                                   ": vertex index out of range");
                if (ti != 0) {
                    int nuv = static_cast<int>(file_uvs.size());
                    if (ti < 0) ti = nuv + ti + 1;
                    if (ti < 1 || ti > nuv)
                        throw ObjError("obj line " + std::to_string(line_no) +
                                       ": texcoord index out of range");
                    vertex_uv[vi - 1] = ti - 1;
                }
                face.push_back(vi - 1);
            }
            if (face.size() < 3)
                throw ObjError("obj line " + std::to_string(line_no) + ": face needs 3+ vertices");
            for (size_t k = 2; k < face.size(); ++k)
                mesh.triangles.push_back({face[0], face[k - 1], face[k]});
        }
        // anything else: ignored
    }
    bool any_uv = false;
    for (int t : vertex_uv) any_uv |= (t >= 0);
    if (any_uv) {
        mesh.uvs.resize(mesh.vertices.size());
        for (size_t i = 0; i < vertex_uv.size(); ++i)
            if (vertex_uv[i] >= 0) mesh.uvs[i] = file_uvs[vertex_uv[i]];
    }
    mesh.validate();
    mesh.build_bvh();
    return mesh;
}

inline MeshPrimitive load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ObjError("cannot open OBJ file: " + path);
    return parse_obj(in);
}

}  // namespace orb
