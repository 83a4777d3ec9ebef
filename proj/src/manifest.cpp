#include <cmath>
#include <fstream>

#include <yaml-cpp/yaml.h>

#include "monster/simulator.hpp"

namespace monster {
namespace {

void emit_rig(YAML::Emitter& e, const StereoRig& rig) {
  e << YAML::BeginMap;
  e << YAML::Key << "baseline" << YAML::Value << rig.baseline;
  e << YAML::Key << "focal_px" << YAML::Value << rig.focal_px;
  e << YAML::Key << "fx" << YAML::Value << rig.intrinsics.fx;
  e << YAML::Key << "fy" << YAML::Value << rig.intrinsics.fy;
  e << YAML::Key << "cx" << YAML::Value << rig.intrinsics.cx;
  e << YAML::Key << "cy" << YAML::Value << rig.intrinsics.cy;
  e << YAML::EndMap;
}

void emit_defocus(YAML::Emitter& e, const DefocusModel& m) {
  e << YAML::BeginMap;
  e << YAML::Key << "pupil_radius" << YAML::Value << m.pupil_radius;
  e << YAML::Key << "wavelength" << YAML::Value << m.wavelength;
  e << YAML::Key << "focal_length" << YAML::Value << m.focal_length;
  e << YAML::Key << "focus_distance" << YAML::Value << m.focus_distance;
  e << YAML::EndMap;
}

StereoRig parse_rig(const YAML::Node& n) {
  StereoRig rig;
  rig.baseline = n["baseline"].as<double>();
  rig.focal_px = n["focal_px"].as<double>();
  rig.intrinsics = {n["fx"].as<double>(), n["fy"].as<double>(), n["cx"].as<double>(),
                    n["cy"].as<double>()};
  return rig;
}

DefocusModel parse_defocus(const YAML::Node& n) {
  DefocusModel m;
  m.pupil_radius = n["pupil_radius"].as<double>();
  m.wavelength = n["wavelength"].as<double>();
  m.focal_length = n["focal_length"].as<double>();
  m.focus_distance = n["focus_distance"].as<double>();
  return m;
}

bool same_rig(const StereoRig& a, const StereoRig& b) {
  return a.baseline == b.baseline && a.focal_px == b.focal_px &&
         a.intrinsics.fx == b.intrinsics.fx && a.intrinsics.fy == b.intrinsics.fy &&
         a.intrinsics.cx == b.intrinsics.cx && a.intrinsics.cy == b.intrinsics.cy;
}

}  // namespace

void write_manifest(const DatasetManifest& m, const std::filesystem::path& file) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "manifest_version" << YAML::Value << m.version;
  e << YAML::Key << "width" << YAML::Value << m.width;
  e << YAML::Key << "height" << YAML::Value << m.height;
  e << YAML::Key << "records" << YAML::Value << YAML::BeginSeq;
  for (const ManifestRecord& r : m.records) {
    e << YAML::BeginMap;
    e << YAML::Key << "id" << YAML::Value << r.id;
    e << YAML::Key << "seed" << YAML::Value << r.seed;
    e << YAML::Key << "left" << YAML::Value << r.left_path;
    e << YAML::Key << "right" << YAML::Value << r.right_path;
    e << YAML::Key << "left_mask" << YAML::Value << r.left_mask_path;
    e << YAML::Key << "right_mask" << YAML::Value << r.right_mask_path;
    e << YAML::Key << "gt_depth" << YAML::Value << r.gt_depth_path;
    e << YAML::Key << "right_gt_depth" << YAML::Value << r.right_gt_depth_path;
    e << YAML::Key << "rig" << YAML::Value;
    emit_rig(e, r.rig);
    e << YAML::Key << "defocus_left" << YAML::Value;
    emit_defocus(e, r.defocus_left);
    e << YAML::Key << "defocus_right" << YAML::Value;
    emit_defocus(e, r.defocus_right);
    if (r.decalibration) {
      e << YAML::Key << "decalibration_params" << YAML::Value << YAML::Flow << YAML::BeginSeq;
      for (double v : *r.decalibration) e << v;
      e << YAML::EndSeq;
    }
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;
  e << YAML::EndMap;

  std::ofstream out(file);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + file.string());
  out << e.c_str() << "\n";
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + file.string());
}

DatasetManifest read_manifest(const std::filesystem::path& file) {
  if (!std::filesystem::exists(file)) {
    throw Error(ErrorCode::IoError, "manifest not found: " + file.string());
  }
  DatasetManifest m;
  try {
    const YAML::Node root = YAML::LoadFile(file.string());
    m.version = root["manifest_version"].as<int>();
    if (m.version != 1) {
      throw Error(ErrorCode::IoError, "unsupported manifest_version " + std::to_string(m.version));
    }
    m.width = root["width"].as<int>();
    m.height = root["height"].as<int>();
    for (const YAML::Node& n : root["records"]) {
      ManifestRecord r;
      r.id = n["id"].as<int>();
      r.seed = n["seed"].as<uint64_t>();
      r.left_path = n["left"].as<std::string>();
      r.right_path = n["right"].as<std::string>();
      if (n["left_mask"]) r.left_mask_path = n["left_mask"].as<std::string>();
      if (n["right_mask"]) r.right_mask_path = n["right_mask"].as<std::string>();
      r.gt_depth_path = n["gt_depth"].as<std::string>();
      if (n["right_gt_depth"]) r.right_gt_depth_path = n["right_gt_depth"].as<std::string>();
      r.rig = parse_rig(n["rig"]);
      r.defocus_left = parse_defocus(n["defocus_left"]);
      r.defocus_right = parse_defocus(n["defocus_right"]);
      if (const YAML::Node p = n["decalibration_params"]) {
        if (p.size() != 8) throw Error(ErrorCode::IoError, "decalibration_params needs 8 values");
        Homography::Params params{};
        for (size_t i = 0; i < 8; ++i) params[i] = p[i].as<double>();
        r.decalibration = params;
      }
      m.records.push_back(std::move(r));
    }
  } catch (const YAML::Exception& ex) {
    throw Error(ErrorCode::IoError, "malformed manifest " + file.string() + ": " + ex.what());
  }
  for (const ManifestRecord& r : m.records) {
    if (!same_rig(r.rig, m.records.front().rig)) {
      throw Error(ErrorCode::InvalidSpec, "records disagree on the stereo rig");
    }
  }
  return m;
}

}  // namespace monster
