#include "monster/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include <fmt/format.h>

#include "monster/io.hpp"
#include "monster/parallel.hpp"
#include "monster/random.hpp"

namespace monster {

PlanePrimitive background_plane(int width, int height, double z) {
  return {0, 0, width - 1, height - 1, z, z, z};
}

PlanePrimitive rectangle(int x0, int y0, int x1, int y1, double z) {
  return {x0, y0, x1, y1, z, z, z};
}

void SceneSpec::validate() const {
  if (width < 1 || height < 1) throw Error(ErrorCode::InvalidSpec, "scene size must be positive");
  if (!(depth_min > 0.0) || !(depth_min < depth_max)) {
    throw Error(ErrorCode::InvalidSpec, "depth range must satisfy 0 < min < max");
  }
  if (layout.empty()) throw Error(ErrorCode::InvalidSpec, "scene needs a background plane");
  const auto* bg = std::get_if<PlanePrimitive>(&layout.front());
  if (!bg || bg->x0 > 0 || bg->y0 > 0 || bg->x1 < width - 1 || bg->y1 < height - 1) {
    throw Error(ErrorCode::InvalidSpec, "first primitive must be a plane covering the frame");
  }
  if (texture.octaves < 1 || !(texture.base_period >= 1.0)) {
    throw Error(ErrorCode::InvalidSpec, "texture needs >= 1 octave and base_period >= 1");
  }
}

namespace {

double plane_depth(const PlanePrimitive& p, int x, int y) {
  const double sx = p.x1 > p.x0 ? static_cast<double>(x - p.x0) / (p.x1 - p.x0) : 0.0;
  const double sy = p.y1 > p.y0 ? static_cast<double>(y - p.y0) / (p.y1 - p.y0) : 0.0;
  const double i0 = 1.0 / p.z_top_left;
  const double inv = i0 + sx * (1.0 / p.z_top_right - i0) + sy * (1.0 / p.z_bottom_left - i0);
  return 1.0 / inv;
}

double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

double value_noise(uint64_t seed, double period, int x, int y) {
  const double gx = x / period;
  const double gy = y / period;
  const double fx0 = std::floor(gx);
  const double fy0 = std::floor(gy);
  const auto ix = static_cast<int64_t>(fx0);
  const auto iy = static_cast<int64_t>(fy0);
  auto node = [&](int64_t i, int64_t j) {
    return counter_uniform(seed, static_cast<uint64_t>(j) * 0x9E3779B1ULL + static_cast<uint64_t>(i));
  };
  const double tx = smooth(gx - fx0);
  const double ty = smooth(gy - fy0);
  const double top = (1 - tx) * node(ix, iy) + tx * node(ix + 1, iy);
  const double bot = (1 - tx) * node(ix, iy + 1) + tx * node(ix + 1, iy + 1);
  return (1 - ty) * top + ty * bot;
}

}  // namespace

Scene generate_scene(const SceneSpec& spec) {
  spec.validate();
  const int w = spec.width;
  const int h = spec.height;
  Scene scene{DepthMap(w, h, std::numeric_limits<double>::infinity()), Image(w, h, 1)};

  for (const Primitive& prim : spec.layout) {
    if (const auto* p = std::get_if<PlanePrimitive>(&prim)) {
      for (int y = std::max(0, p->y0); y <= std::min(h - 1, p->y1); ++y) {
        for (int x = std::max(0, p->x0); x <= std::min(w - 1, p->x1); ++x) {
          const double z = plane_depth(*p, x, y);
          if (z < scene.depth.value(x, y)) scene.depth.set(x, y, z);
        }
      }
    } else {
      const auto& s = std::get<SpherePrimitive>(prim);
      const int x0 = std::max(0, static_cast<int>(std::floor(s.cx - s.radius_px)));
      const int x1 = std::min(w - 1, static_cast<int>(std::ceil(s.cx + s.radius_px)));
      const int y0 = std::max(0, static_cast<int>(std::floor(s.cy - s.radius_px)));
      const int y1 = std::min(h - 1, static_cast<int>(std::ceil(s.cy + s.radius_px)));
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          const double rho2 = ((x - s.cx) * (x - s.cx) + (y - s.cy) * (y - s.cy)) /
                              (s.radius_px * s.radius_px);
          if (rho2 >= 1.0) continue;
          const double z = s.z_center - s.radius_m * std::sqrt(1.0 - rho2);
          if (z < scene.depth.value(x, y)) scene.depth.set(x, y, z);
        }
      }
    }
  }

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double z = scene.depth.value(x, y);
      if (!(z >= spec.depth_min - 1e-12 && z <= spec.depth_max + 1e-12)) {
        throw Error(ErrorCode::InvalidSpec,
                    fmt::format("depth {} at ({},{}) outside [{}, {}]", z, x, y, spec.depth_min,
                                spec.depth_max));
      }
    }
  }

  const TextureSpec& t = spec.texture;
  const uint64_t tex_seed = derive_seed(spec.rng_seed, "scene.texture");
  double total = 0.0;
  for (int o = 0; o < t.octaves; ++o) total += std::pow(t.persistence, o);
  parallel_for(0, h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      double v = 0.0;
      for (int o = 0; o < t.octaves; ++o) {
        const double period = std::max(2.0, t.base_period / std::pow(2.0, o));
        v += std::pow(t.persistence, o) * value_noise(hash_combine(tex_seed, o), period, x, y);
      }
      v /= total;
      if (t.checker_period > 0) {
        const bool odd = ((x / t.checker_period) + (y / t.checker_period)) % 2 != 0;
        v += odd ? t.checker_amplitude : -t.checker_amplitude;
      }
      scene.texture.at(x, y) = std::clamp(v, 0.0, 1.0);
    }
  });
  return scene;
}

SceneSpec random_scene_spec(const SceneSpec& base, uint64_t seed) {
  SceneSpec spec = base;
  spec.rng_seed = seed;
  spec.layout.clear();
  const int w = base.width;
  const int h = base.height;
  const uint64_t s = derive_seed(seed, "scene.layout");
  uint64_t counter = 0;
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * counter_uniform(s, counter++); };
  auto uniform_int = [&](int lo, int hi) {
    return std::min(hi, lo + static_cast<int>(std::floor(uniform(0.0, 1.0) * (hi - lo + 1))));
  };
  // log-uniform depth over a fraction [a,b] of the log range
  const double lmin = std::log(base.depth_min);
  const double lmax = std::log(base.depth_max);
  auto depth_at = [&](double a, double b) {
    return std::clamp(std::exp(lmin + uniform(a, b) * (lmax - lmin)), base.depth_min, base.depth_max);
  };

  // The unconstrained bottom-right corner of a plane can leave the range;
  // flatten the slant until it does not.
  auto keep_in_range = [&](PlanePrimitive& p) {
    const double i0 = 1.0 / p.z_top_left;
    double di_x = 1.0 / p.z_top_right - i0;
    double di_y = 1.0 / p.z_bottom_left - i0;
    while (!(i0 + di_x + di_y >= 1.0 / base.depth_max && i0 + di_x + di_y <= 1.0 / base.depth_min)) {
      di_x *= 0.5;
      di_y *= 0.5;
    }
    p.z_top_right = 1.0 / (i0 + di_x);
    p.z_bottom_left = 1.0 / (i0 + di_y);
  };

  PlanePrimitive bg = background_plane(w, h, 1.0);
  bg.z_top_left = depth_at(0.75, 1.0);
  bg.z_top_right = depth_at(0.75, 1.0);
  bg.z_bottom_left = depth_at(0.6, 0.85);
  keep_in_range(bg);
  spec.layout.emplace_back(bg);

  const int rects = uniform_int(3, 6);
  for (int i = 0; i < rects; ++i) {
    const int rw = uniform_int(w / 8, w / 2);
    const int rh = uniform_int(h / 8, h / 2);
    const int x0 = uniform_int(-rw / 4, w - 1 - rw / 2);
    const int y0 = uniform_int(-rh / 4, h - 1 - rh / 2);
    spec.layout.emplace_back(rectangle(x0, y0, x0 + rw, y0 + rh, depth_at(0.0, 0.9)));
  }
  const int slanted = uniform_int(1, 2);
  for (int i = 0; i < slanted; ++i) {
    const int rw = uniform_int(w / 6, w / 3);
    const int rh = uniform_int(h / 6, h / 3);
    const int x0 = uniform_int(0, w - 1 - rw);
    const int y0 = uniform_int(0, h - 1 - rh);
    const double a = uniform(0.05, 0.8);
    PlanePrimitive p{x0, y0, x0 + rw, y0 + rh, depth_at(a, a), depth_at(a - 0.05, a + 0.05),
                     depth_at(a - 0.05, a + 0.05)};
    keep_in_range(p);
    spec.layout.emplace_back(p);
  }
  const int spheres = uniform_int(1, 2);
  for (int i = 0; i < spheres; ++i) {
    SpherePrimitive sp;
    sp.radius_px = uniform(w / 16.0, w / 6.0);
    sp.cx = uniform(sp.radius_px, w - sp.radius_px);
    sp.cy = uniform(sp.radius_px, h - sp.radius_px);
    const double z = depth_at(0.05, 0.9);
    sp.radius_m = 0.08 * z;
    sp.z_center = z + sp.radius_m;
    if (sp.z_center - sp.radius_m < base.depth_min) sp.z_center = base.depth_min + sp.radius_m;
    if (sp.z_center > base.depth_max) continue;
    spec.layout.emplace_back(sp);
  }
  return spec;
}

StereoPair render_stereo_pair(const Image& texture, const DepthMap& depth, const StereoRig& rig) {
  if (!depth.same_shape(texture.width, texture.height)) {
    throw Error(ErrorCode::DimensionMismatch, "texture and depth differ in size");
  }
  rig.validate();
  const int w = texture.width;
  const int h = texture.height;
  const int ch = texture.channels;
  const double fb = rig.focal_px * rig.baseline;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!depth.valid(x, y) || !(depth.value(x, y) > 0.0)) {
        throw Error(ErrorCode::NonPositiveDepth, "render needs valid positive depth everywhere");
      }
    }
  }

  StereoPair out{texture, Image(w, h, ch), DepthMap(w, h, 0.0, false)};
  std::fill(out.right.valid.begin(), out.right.valid.end(), 0);

  parallel_for(0, h, [&](int y) {
    std::vector<double> zbuf(w, std::numeric_limits<double>::infinity());
    for (int x = 0; x + 1 < w; ++x) {
      const double z0 = depth.value(x, y);
      const double z1 = depth.value(x + 1, y);
      const double d0 = fb / z0;
      const double d1 = fb / z1;
      if (std::abs(d1 - d0) >= 1.0) continue;  // depth discontinuity
      const double a = x - d0;
      const double b = x + 1 - d1;
      if (!(b > a)) continue;
      const int lo = std::max(0, static_cast<int>(std::ceil(a)));
      const int hi = std::min(w - 1, static_cast<int>(std::floor(b)));
      for (int xr = lo; xr <= hi; ++xr) {
        const double t = (xr - a) / (b - a);
        const double z = 1.0 / ((1 - t) / z0 + t / z1);
        if (!(z < zbuf[xr])) continue;
        zbuf[xr] = z;
        for (int c = 0; c < ch; ++c) {
          out.right.at(xr, y, c) = (1 - t) * texture.at(x, y, c) + t * texture.at(x + 1, y, c);
        }
        out.right.valid[out.right.pixel_index(xr, y)] = 1;
        out.right_depth.set(xr, y, z);
      }
    }
  });
  return out;
}

Image add_image_noise(const Image& img, double sigma, uint64_t seed) {
  Image out = img;
  if (sigma <= 0.0) return out;
  const uint64_t s = derive_seed(seed, "image.noise");
  for (size_t i = 0; i < out.samples.size(); ++i) {
    out.samples[i] = std::clamp(out.samples[i] + sigma * counter_normal(s, i), 0.0, 1.0);
  }
  return out;
}

Image decalibrate(const Image& img, const Homography& h) { return warp_image(img, h); }

namespace {

double parse_angle(const std::string& text) {
  std::string t = text;
  double scale = std::numbers::pi / 180.0;
  if (t.size() > 3 && t.ends_with("deg")) {
    t.resize(t.size() - 3);
  } else if (t.size() > 3 && t.ends_with("rad")) {
    t.resize(t.size() - 3);
    scale = 1.0;
  }
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError, "bad angle: " + text);
  }
  if (used != t.size()) throw Error(ErrorCode::ConfigError, "bad angle: " + text);
  return v * scale;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

}  // namespace

RotationAxis parse_axis(const std::string& name) {
  if (name == "inplane") return RotationAxis::InPlane;
  if (name == "pitch") return RotationAxis::Pitch;
  if (name == "yaw") return RotationAxis::Yaw;
  throw Error(ErrorCode::ConfigError, "unknown rotation axis: " + name);
}

DecalDistribution parse_decalibration(const std::string& text, const Intrinsics& k) {
  DecalDistribution out;
  if (text.empty() || text == "none") return out;
  const auto parts = split(text, ':');
  if (parts.size() == 2 && parts[0] == "params") {
    const auto vals = split(parts[1], ',');
    if (vals.size() != 8) throw Error(ErrorCode::ConfigError, "params needs 8 values: " + text);
    Homography::Params p{};
    for (int i = 0; i < 8; ++i) {
      try {
        p[i] = std::stod(vals[i]);
      } catch (const std::exception&) {
        throw Error(ErrorCode::ConfigError, "bad parameter: " + vals[i]);
      }
    }
    out.kind = DecalKind::Fixed;
    out.fixed = Homography::from_params(p);
    if (!out.fixed.is_invertible()) {
      throw Error(ErrorCode::ConfigError, "decalibration homography is singular");
    }
    return out;
  }
  if (parts.size() == 3 && parts[1] == "uniform") {
    if (parse_axis(parts[0]) != RotationAxis::InPlane) {
      throw Error(ErrorCode::ConfigError, "uniform decalibration supports inplane only");
    }
    out.kind = DecalKind::UniformInPlane;
    out.max_angle_rad = std::abs(parse_angle(parts[2]));
    return out;
  }
  if (parts.size() == 2) {
    out.kind = DecalKind::Fixed;
    out.fixed = rotation_homography(parse_axis(parts[0]), parse_angle(parts[1]), k);
    return out;
  }
  throw Error(ErrorCode::ConfigError, "cannot parse decalibration: " + text);
}

DatasetManifest build_dataset(const DatasetOptions& opts, const std::filesystem::path& dir) {
  if (opts.count < 1) throw Error(ErrorCode::InvalidSpec, "dataset needs at least one record");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string());

  DatasetManifest manifest;
  manifest.width = opts.scene_template.width;
  manifest.height = opts.scene_template.height;
  const Intrinsics k = opts.rig.intrinsics;
  const uint64_t scene_seed = derive_seed(opts.seed, "dataset.scene");
  const uint64_t decal_seed = derive_seed(opts.seed, "dataset.decal");
  if (opts.pan_px < 0) throw Error(ErrorCode::InvalidSpec, "pan_px must be >= 0");

  const int w = opts.scene_template.width;
  const int h = opts.scene_template.height;
  std::optional<Scene> wide_scene;
  std::optional<StereoPair> wide_pair;
  if (opts.pan_px > 0) {
    SceneSpec spec = opts.scene_template;
    spec.width = w + (opts.count - 1) * opts.pan_px;
    wide_scene = generate_scene(random_scene_spec(spec, derive_seed(opts.seed, "dataset.stream")));
    wide_pair = render_stereo_pair(wide_scene->texture, wide_scene->depth, opts.rig);
  }

  for (int i = 0; i < opts.count; ++i) {
    ManifestRecord rec;
    rec.id = i;
    rec.seed = hash_combine(scene_seed, static_cast<uint64_t>(i));
    rec.rig = opts.rig;
    rec.defocus_left = opts.defocus_left;
    rec.defocus_right = opts.defocus_right;

    Scene scene;
    StereoPair pair;
    if (wide_pair) {
      const int x0 = i * opts.pan_px;
      scene.depth = crop(wide_scene->depth, x0, 0, w, h);
      pair.left = crop(wide_pair->left, x0, 0, w, h);
      pair.right = crop(wide_pair->right, x0, 0, w, h);
      pair.right_depth = crop(wide_pair->right_depth, x0, 0, w, h);
    } else {
      scene = generate_scene(random_scene_spec(opts.scene_template, rec.seed));
      pair = render_stereo_pair(scene.texture, scene.depth, opts.rig);
    }
    pair.left = add_image_noise(pair.left, opts.image_noise_sigma, hash_combine(rec.seed, 1));
    Image right = add_image_noise(pair.right, opts.image_noise_sigma, hash_combine(rec.seed, 2));
    right.valid = pair.right.valid;

    switch (opts.decalibration.kind) {
      case DecalKind::None: break;
      case DecalKind::Fixed: rec.decalibration = opts.decalibration.fixed.params(); break;
      case DecalKind::UniformInPlane: {
        const double u = counter_uniform(decal_seed, static_cast<uint64_t>(i));
        const double angle = (2.0 * u - 1.0) * opts.decalibration.max_angle_rad;
        rec.decalibration = rotation_homography(RotationAxis::InPlane, angle, k).params();
        break;
      }
    }
    if (rec.decalibration) {
      pair.left = decalibrate(pair.left, Homography::from_params(*rec.decalibration));
    }

    const std::string stem = fmt::format("scene_{:04d}", i);
    rec.left_path = stem + "_left.png";
    rec.right_path = stem + "_right.png";
    rec.gt_depth_path = stem + "_depth.pfm";
    rec.right_gt_depth_path = stem + "_right_depth.pfm";
    rec.left_mask_path = stem + "_left_mask.png";
    rec.right_mask_path = stem + "_right_mask.png";
    write_png(dir / rec.left_path, pair.left);
    write_png(dir / rec.right_path, right);
    write_mask_png(dir / rec.left_mask_path, validity_of(pair.left));
    write_mask_png(dir / rec.right_mask_path, validity_of(right));
    write_pfm(dir / rec.gt_depth_path, scene.depth);
    write_pfm(dir / rec.right_gt_depth_path, pair.right_depth);
    manifest.records.push_back(std::move(rec));
  }
  write_manifest(manifest, dir / "manifest.yaml");
  return manifest;
}

LoadedRecord load_record(const ManifestRecord& r, const std::filesystem::path& base_dir) {
  LoadedRecord out;
  out.left = read_png(base_dir / r.left_path);
  out.right = read_png(base_dir / r.right_path);
  if (!r.left_mask_path.empty()) set_validity(out.left, read_mask_png(base_dir / r.left_mask_path));
  if (!r.right_mask_path.empty()) {
    set_validity(out.right, read_mask_png(base_dir / r.right_mask_path));
  }
  out.gt_depth = read_pfm<DepthTag>(base_dir / r.gt_depth_path);
  if (!r.right_gt_depth_path.empty()) {
    out.right_gt_depth = read_pfm<DepthTag>(base_dir / r.right_gt_depth_path);
  }
  return out;
}

}  // namespace monster
