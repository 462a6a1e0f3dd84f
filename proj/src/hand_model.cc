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

#include "dexgrasp/hand_model.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "json.hpp"

namespace dexgrasp {
namespace {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

Vec3 ParseTriple(const std::string& text, const Vec3& fallback) {
  if (text.empty()) return fallback;
  std::istringstream in(text);
  Vec3 v;
  if (!(in >> v.x() >> v.y() >> v.z())) throw Error("bad vector '" + text + "'");
  return v;
}

Isometry ParseOrigin(const pt::ptree& parent) {
  Isometry iso = Isometry::Identity();
  const auto origin = parent.get_child_optional("origin");
  if (!origin) return iso;
  const Vec3 xyz = ParseTriple(origin->get("<xmlattr>.xyz", ""), Vec3::Zero());
  const Vec3 rpy = ParseTriple(origin->get("<xmlattr>.rpy", ""), Vec3::Zero());
  iso.linear() = (Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) *
                  Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
                  Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()))
                     .toRotationMatrix();
  iso.translation() = xyz;
  return iso;
}

TriMesh MergeMeshes(const std::vector<TriMesh>& parts) {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  for (const TriMesh& m : parts) {
    const int base = static_cast<int>(vertices.size());
    vertices.insert(vertices.end(), m.vertices().begin(), m.vertices().end());
    for (const Face& f : m.faces()) faces.push_back({f[0] + base, f[1] + base, f[2] + base});
  }
  return TriMesh(std::move(vertices), std::move(faces));
}

TriMesh ParseGeometry(const pt::ptree& element, const fs::path& base_dir) {
  const Isometry origin = ParseOrigin(element);
  const auto geometry = element.get_child_optional("geometry");
  if (!geometry) return TriMesh();
  if (const auto mesh = geometry->get_child_optional("mesh")) {
    std::string file = mesh->get<std::string>("<xmlattr>.filename");
    const std::string prefix = "package://";
    if (file.rfind(prefix, 0) == 0) file = file.substr(prefix.size());
    fs::path path = fs::path(file).is_absolute() ? fs::path(file) : base_dir / file;
    if (!fs::exists(path)) throw Error("missing mesh file: " + path.string());
    const Vec3 scale =
        ParseTriple(mesh->get("<xmlattr>.scale", ""), Vec3::Ones());
    TriMesh loaded = LoadMesh(path.string());
    std::vector<Vec3> vertices;
    for (const Vec3& v : loaded.vertices()) vertices.push_back(origin * scale.cwiseProduct(v));
    return TriMesh(std::move(vertices), loaded.faces());
  }
  if (const auto box = geometry->get_child_optional("box")) {
    const Vec3 size = ParseTriple(box->get<std::string>("<xmlattr>.size"), Vec3::Zero());
    return MakeBox(-0.5 * size, 0.5 * size).Transformed(origin);
  }
  throw Error("unsupported geometry; only mesh and box are handled");
}

Vec3 JsonVec3(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw Error(what + " must be a 3-vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

HandModel::HandModel(std::vector<Link> links, std::vector<Joint> joints,
                     std::vector<ContactCandidate> candidates,
                     std::vector<SpenSphere> spheres, VecX theta_ref,
                     Vec3 palm_axis)
    : links_(std::move(links)),
      joints_(std::move(joints)),
      candidates_(std::move(candidates)),
      spheres_(std::move(spheres)),
      theta_ref_(std::move(theta_ref)) {
  const int nl = num_links();
  if (nl == 0) throw Error("hand has no links");
  parent_joint_.assign(nl, -1);
  link_dofs_.assign(nl, {});
  std::vector<bool> reached(nl, false);
  reached[0] = true;
  std::vector<double> lower, upper;
  for (int j = 0; j < static_cast<int>(joints_.size()); ++j) {
    Joint& joint = joints_[j];
    if (joint.parent_link < 0 || joint.parent_link >= nl || joint.child_link < 0 ||
        joint.child_link >= nl) {
      throw Error("joint '" + joint.name + "' references an unknown link");
    }
    if (!reached[joint.parent_link]) {
      throw Error("joint '" + joint.name +
                  "' is not reachable from the root; joints must be listed parents-first");
    }
    if (joint.child_link == 0 || parent_joint_[joint.child_link] >= 0) {
      throw Error("joint graph is not a tree (link '" +
                  links_[joint.child_link].name + "' has two parents or a cycle)");
    }
    parent_joint_[joint.child_link] = j;
    reached[joint.child_link] = true;
    link_dofs_[joint.child_link] = link_dofs_[joint.parent_link];
    if (joint.type == JointType::kRevolute) {
      if (!(joint.lower < joint.upper)) {
        throw Error("joint '" + joint.name + "' has lower limit >= upper limit");
      }
      const double n = joint.axis.norm();
      if (!(n > 0.0)) throw Error("joint '" + joint.name + "' has a zero axis");
      joint.axis /= n;
      joint.dof = num_dofs_++;
      lower.push_back(joint.lower);
      upper.push_back(joint.upper);
      link_dofs_[joint.child_link].push_back(joint.dof);
    } else {
      joint.dof = -1;
    }
  }
  for (int l = 0; l < nl; ++l) {
    if (!reached[l]) throw Error("link '" + links_[l].name + "' is not connected to the root");
  }
  lower_ = Eigen::Map<VecX>(lower.data(), num_dofs_);
  upper_ = Eigen::Map<VecX>(upper.data(), num_dofs_);

  if (theta_ref_.size() != num_dofs_) {
    throw Error("theta_ref has " + std::to_string(theta_ref_.size()) +
                " entries, hand has " + std::to_string(num_dofs_) + " joints");
  }
  for (int i = 0; i < num_dofs_; ++i) {
    if (theta_ref_[i] < lower_[i] || theta_ref_[i] > upper_[i]) {
      throw Error("theta_ref[" + std::to_string(i) + "] is outside the joint limits");
    }
  }
  for (ContactCandidate& c : candidates_) {
    if (c.link < 0 || c.link >= nl) throw Error("contact candidate references an unknown link");
    const double n = c.normal.norm();
    if (!(n > 0.0)) throw Error("contact candidate has a zero normal");
    c.normal /= n;
  }
  for (const SpenSphere& s : spheres_) {
    if (s.link < 0 || s.link >= nl) throw Error("sphere references an unknown link");
    if (!(s.radius > 0.0)) throw Error("sphere radius must be positive");
  }
  if (!(palm_axis.norm() > 0.0)) throw Error("palm axis must be nonzero");
  palm_axis_ = palm_axis.normalized();
}

HandModel HandModel::Load(const std::string& urdf_path,
                          const std::string& annotation_path) {
  pt::ptree tree;
  try {
    pt::read_xml(urdf_path, tree);
  } catch (const pt::xml_parser_error& e) {
    throw Error("cannot parse hand description " + urdf_path + ": " + e.what());
  }
  const fs::path base_dir = fs::path(urdf_path).parent_path();
  const auto robot = tree.get_child_optional("robot");
  if (!robot) throw Error(urdf_path + ": missing <robot> element");

  std::vector<Link> links;
  std::map<std::string, int> link_index;
  struct RawJoint {
    Joint joint;
    std::string parent, child;
  };
  std::vector<RawJoint> raw;
  for (const auto& [tag, node] : *robot) {
    if (tag == "link") {
      Link link;
      link.name = node.get<std::string>("<xmlattr>.name");
      std::vector<TriMesh> parts;
      for (const auto& [sub, geom] : node) {
        if (sub == "collision") parts.push_back(ParseGeometry(geom, base_dir));
      }
      if (parts.empty()) {
        for (const auto& [sub, geom] : node) {
          if (sub == "visual") parts.push_back(ParseGeometry(geom, base_dir));
        }
      }
      link.mesh = MergeMeshes(parts);
      if (!link_index.emplace(link.name, static_cast<int>(links.size())).second) {
        throw Error(urdf_path + ": duplicate link '" + link.name + "'");
      }
      links.push_back(std::move(link));
    } else if (tag == "joint") {
      RawJoint r;
      r.joint.name = node.get<std::string>("<xmlattr>.name");
      const std::string type = node.get<std::string>("<xmlattr>.type");
      if (type == "revolute") {
        r.joint.type = JointType::kRevolute;
      } else if (type == "fixed") {
        r.joint.type = JointType::kFixed;
      } else {
        throw Error(urdf_path + ": joint '" + r.joint.name + "' has unsupported type '" +
                    type + "'");
      }
      r.parent = node.get<std::string>("parent.<xmlattr>.link");
      r.child = node.get<std::string>("child.<xmlattr>.link");
      r.joint.origin = ParseOrigin(node);
      r.joint.axis = ParseTriple(node.get("axis.<xmlattr>.xyz", ""), Vec3::UnitX());
      if (r.joint.type == JointType::kRevolute) {
        r.joint.lower = node.get<double>("limit.<xmlattr>.lower");
        r.joint.upper = node.get<double>("limit.<xmlattr>.upper");
      }
      raw.push_back(std::move(r));
    }
  }
  for (RawJoint& r : raw) {
    auto p = link_index.find(r.parent);
    auto c = link_index.find(r.child);
    if (p == link_index.end() || c == link_index.end()) {
      throw Error(urdf_path + ": joint '" + r.joint.name + "' references an unknown link");
    }
    r.joint.parent_link = p->second;
    r.joint.child_link = c->second;
  }

  // Root = the single link that is nobody's child; reorder links so the
  // root is first and joints breadth-first.
  std::vector<int> parent_count(links.size(), 0);
  for (const RawJoint& r : raw) ++parent_count[r.joint.child_link];
  int root = -1;
  for (int l = 0; l < static_cast<int>(links.size()); ++l) {
    if (parent_count[l] > 1) {
      throw Error(urdf_path + ": link '" + links[l].name + "' has several parents");
    }
    if (parent_count[l] == 0) {
      if (root >= 0) throw Error(urdf_path + ": several root links");
      root = l;
    }
  }
  if (root < 0) throw Error(urdf_path + ": cyclic joint graph (no root link)");

  std::vector<int> new_index(links.size(), -1);
  std::vector<int> link_order = {root};
  new_index[root] = 0;
  std::vector<Joint> joints;
  for (size_t head = 0; head < link_order.size(); ++head) {
    for (const RawJoint& r : raw) {
      if (r.joint.parent_link != link_order[head]) continue;
      if (new_index[r.joint.child_link] >= 0) {
        throw Error(urdf_path + ": cyclic joint graph");
      }
      new_index[r.joint.child_link] = static_cast<int>(link_order.size());
      link_order.push_back(r.joint.child_link);
      Joint j = r.joint;
      j.parent_link = new_index[r.joint.parent_link];
      j.child_link = new_index[r.joint.child_link];
      joints.push_back(j);
    }
  }
  if (link_order.size() != links.size()) throw Error(urdf_path + ": cyclic joint graph");
  std::vector<Link> ordered;
  for (int l : link_order) ordered.push_back(std::move(links[l]));
  std::map<std::string, int> ordered_index;
  for (int l = 0; l < static_cast<int>(ordered.size()); ++l) ordered_index[ordered[l].name] = l;

  std::ifstream in(annotation_path);
  if (!in) throw Error("cannot open hand annotations: " + annotation_path);
  nlohmann::json ann;
  try {
    ann = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(annotation_path + ": " + e.what());
  }
  auto lookup = [&](const std::string& name) {
    auto it = ordered_index.find(name);
    if (it == ordered_index.end()) {
      throw Error(annotation_path + ": unknown link '" + name + "'");
    }
    return it->second;
  };
  try {
    // Either an array in degree-of-freedom order or an object keyed by joint name.
    std::vector<double> ref;
    const nlohmann::json& ref_json = ann.at("theta_ref");
    if (ref_json.is_object()) {
      for (const Joint& j : joints) {
        if (j.type != JointType::kRevolute) continue;
        if (!ref_json.contains(j.name)) {
          throw Error(annotation_path + ": theta_ref has no entry for joint '" + j.name + "'");
        }
        ref.push_back(ref_json.at(j.name).get<double>());
      }
      if (ref_json.size() != ref.size()) {
        throw Error(annotation_path + ": theta_ref names a joint the hand does not have");
      }
    } else {
      ref = ref_json.get<std::vector<double>>();
    }
    std::vector<ContactCandidate> candidates;
    for (const auto& c : ann.at("contact_candidates")) {
      candidates.push_back({lookup(c.at("link").get<std::string>()),
                            JsonVec3(c.at("point"), "candidate point"),
                            JsonVec3(c.at("normal"), "candidate normal")});
    }
    std::vector<SpenSphere> spheres;
    if (ann.contains("spen_spheres")) {
      for (const auto& s : ann.at("spen_spheres")) {
        spheres.push_back({lookup(s.at("link").get<std::string>()),
                           JsonVec3(s.at("center"), "sphere center"),
                           s.at("radius").get<double>()});
      }
    }
    const Vec3 palm = ann.contains("palm_axis") ? JsonVec3(ann["palm_axis"], "palm_axis")
                                               : Vec3::UnitZ();
    return HandModel(std::move(ordered), std::move(joints), std::move(candidates),
                     std::move(spheres), Eigen::Map<VecX>(ref.data(), ref.size()), palm);
  } catch (const nlohmann::json::exception& e) {
    throw Error(annotation_path + ": " + e.what());
  }
}

int HandModel::LinkIndex(const std::string& name) const {
  for (int l = 0; l < num_links(); ++l) {
    if (links_[l].name == name) return l;
  }
  return -1;
}

bool HandModel::LinksAdjacent(int a, int b) const {
  if (a == b) return true;
  const int ja = parent_joint_[a];
  const int jb = parent_joint_[b];
  return (ja >= 0 && joints_[ja].parent_link == b) ||
         (jb >= 0 && joints_[jb].parent_link == a);
}

GraspPose HandModel::RestPose() const {
  GraspPose pose;
  pose.theta = theta_ref_;
  return pose;
}

Posed ForwardKinematics(const HandModel& hand, const GraspPose& pose) {
  Posed posed;
  posed.translation = pose.translation;
  posed.link_transforms.assign(hand.num_links(), Isometry::Identity());
  posed.dof_axes.assign(hand.num_dofs(), Vec3::Zero());
  posed.dof_origins.assign(hand.num_dofs(), Vec3::Zero());
  Isometry root = Isometry::Identity();
  root.linear() = pose.rotation.normalized().toRotationMatrix();
  root.translation() = pose.translation;
  posed.link_transforms[0] = root;
  for (const Joint& joint : hand.joints()) {
    const Isometry frame = posed.link_transforms[joint.parent_link] * joint.origin;
    if (joint.type == JointType::kRevolute) {
      Isometry motion = Isometry::Identity();
      motion.linear() =
          Eigen::AngleAxisd(pose.theta[joint.dof], joint.axis).toRotationMatrix();
      posed.link_transforms[joint.child_link] = frame * motion;
      posed.dof_axes[joint.dof] = frame.linear() * joint.axis;
      posed.dof_origins[joint.dof] = frame.translation();
    } else {
      posed.link_transforms[joint.child_link] = frame;
    }
  }
  return posed;
}

PointJacobian Posed::JacobianAt(const HandModel& hand, int link,
                                const Vec3& world_point) const {
  PointJacobian jac = PointJacobian::Zero(3, kRigidDofs + hand.num_dofs());
  jac.leftCols<3>().setIdentity();
  jac.block<3, 3>(0, 3) = -Skew(world_point - translation);
  for (int dof : hand.link_dofs(link)) {
    jac.col(kRigidDofs + dof) = dof_axes[dof].cross(world_point - dof_origins[dof]);
  }
  return jac;
}

std::vector<WorldCandidate> WorldCandidates(const HandModel& hand,
                                            const Posed& posed,
                                            std::span<const int> indices) {
  const auto& all = hand.contact_candidates();
  std::vector<WorldCandidate> out;
  out.reserve(indices.size());
  for (int idx : indices) {
    if (idx < 0 || idx >= static_cast<int>(all.size())) {
      throw Error("contact candidate index " + std::to_string(idx) + " out of range");
    }
    const ContactCandidate& c = all[idx];
    const Isometry& tf = posed.link_transforms[c.link];
    WorldCandidate w;
    w.point = tf * c.point;
    w.normal = tf.linear() * c.normal;
    w.link = c.link;
    w.jacobian = posed.JacobianAt(hand, c.link, w.point);
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<WorldSphere> WorldSpheres(const HandModel& hand, const Posed& posed) {
  std::vector<WorldSphere> out;
  out.reserve(hand.spen_spheres().size());
  for (const SpenSphere& s : hand.spen_spheres()) {
    WorldSphere w;
    w.center = posed.link_transforms[s.link] * s.center;
    w.radius = s.radius;
    w.link = s.link;
    w.jacobian = posed.JacobianAt(hand, s.link, w.center);
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<LinkSample> SampleHandSurface(const HandModel& hand, int per_link,
                                          Rng& rng) {
  if (per_link < 1) throw Error("per-link sample count must be at least 1");
  std::vector<LinkSample> out;
  for (int l = 0; l < hand.num_links(); ++l) {
    const TriMesh& mesh = hand.links()[l].mesh;
    if (mesh.empty()) continue;
    for (const SurfaceSample& s : SampleSurface(mesh, per_link, rng)) {
      out.push_back({l, s});
    }
  }
  return out;
}

std::vector<SurfaceSample> PoseHandSamples(std::span<const LinkSample> samples,
                                           const Posed& posed) {
  std::vector<SurfaceSample> out;
  out.reserve(samples.size());
  for (const LinkSample& s : samples) {
    const Isometry& tf = posed.link_transforms[s.link];
    out.push_back({tf * s.local.point, tf.linear() * s.local.normal, s.local.face_id});
  }
  return out;
}

std::vector<SurfaceSample> HandSurface(const HandModel& hand, const Posed& posed,
                                       int per_link, Rng& rng) {
  const auto local = SampleHandSurface(hand, per_link, rng);
  return PoseHandSamples(local, posed);
}

}  // namespace dexgrasp
