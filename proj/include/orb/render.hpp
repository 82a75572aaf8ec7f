#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

#include "orb/rng.hpp"
#include "orb/scene_gen.hpp"

namespace orb {

struct RenderError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RenderStats {
    long long paths = 0;
    long long depth_cutoffs = 0;     // paths stopped by max_depth
    long long nonfinite_samples = 0;  // clamped to black (non-strict mode)
    long long inconsistent_paths = 0;  // medium-stack mismatches, dropped
    double seconds = 0.0;
};

namespace detail_render {

struct PathCounters {
    bool depth_cutoff = false;
    bool inconsistent = false;
};

// One radiance sample. Dielectric interfaces use single-path Fresnel
// sampling (reflect with probability R, else transmit); Lambert surfaces get
// next-event estimation toward each cone direction plus one cosine-sampled
// indirect bounce. Escaped rays return the constant ambient environment.
inline RGB trace_path(const TraceScene& scene, Ray ray, PathRng& rng, PathCounters& pc) {
    RGB radiance{0.0, 0.0, 0.0};
    RGB throughput{1.0, 1.0, 1.0};
    MediumStack stack;

    for (int depth = 0;; ++depth) {
        if (depth >= scene.settings.max_depth) {
            pc.depth_cutoff = true;
            break;
        }
        auto hit = scene.intersect(ray);
        if (!hit) {
            radiance += throughput * scene.ambient;
            break;
        }

        // Beer-Lambert attenuation across the medium just traversed.
        if (stack.top().medium_id != kAmbientMedium) {
            const auto& med_mat =
                scene.materials[scene.primitives[stack.top().medium_id].material_id];
            const RGB& k = med_mat.absorption_per_cm;
            if (k.r > 0.0 || k.g > 0.0 || k.b > 0.0)
                throughput *= RGB{std::exp(-k.r * hit->t), std::exp(-k.g * hit->t),
                                  std::exp(-k.b * hit->t)};
        }

        const SceneMaterial& mat = scene.materials[hit->material_id];
        if (mat.kind == SceneMaterial::Kind::Dielectric) {
            // The glass occupies the space between the two interfaces, so a
            // crossing moves into glass iff it enters the outer sphere or
            // exits the inner one.
            bool into_glass = (hit->interface_kind == Interface::Outer) == hit->entering;
            UnitDir n = hit->entering ? hit->normal : UnitDir(-1.0 * hit->normal);
            double cos_i = -dot(ray.dir, n);
            double n_from = stack.top().ior;
            double n_to;
            if (into_glass) {
                n_to = mat.diel.ior;
            } else {
                if (stack.depth() < 2 || stack.top().medium_id != hit->primitive_id) {
                    pc.inconsistent = true;
                    return RGB{0.0, 0.0, 0.0};
                }
                n_to = stack.below_top().ior;
            }

            // exactly tangent rays reflect (grazing limit R -> 1)
            double refl = cos_i > 1e-12 ? fresnel_reflectance(cos_i, n_from, n_to) : 1.0;
            if (rng.next() < refl) {
                ray = Ray{hit->point, reflect(ray.dir, n)};
            } else {
                auto refr = refract(ray.dir, n, n_from / n_to);
                if (!refr) {  // numerical edge exactly at the critical angle
                    ray = Ray{hit->point, reflect(ray.dir, n)};
                } else {
                    throughput *= mat.diel.tint;
                    if (into_glass)
                        stack.push(hit->primitive_id, mat.diel.ior);
                    else
                        stack.pop(hit->primitive_id);
                    ray = Ray{hit->point, *refr};
                }
            }
        } else {
            RGB alb = mat.albedo(hit->point.x, hit->point.y);
            UnitDir n = hit->entering ? hit->normal : UnitDir(-1.0 * hit->normal);
            Point3 off = hit->point + n * kRayEpsilon;
            for (const DirectionalLight& light : scene.lights) {
                UnitDir wi = -1.0 * light.direction;
                double cos_l = dot(wi, n);
                if (cos_l <= 0.0) continue;
                if (scene.occluded(Ray{off, wi})) continue;
                radiance += throughput * alb * light.radiance * (cos_l / kPi);
            }
            Vec2 u = rng.next2();
            UnitDir bounce = cosine_sample_hemisphere(n, u.x, u.y);
            throughput *= alb;  // cosine pdf cancels the cos/pi factor
            ray = Ray{off, bounce};
        }

        if (depth >= 8) {
            double p = std::clamp(throughput.max_component(), 0.05, 1.0);
            if (rng.next() >= p) break;
            throughput = throughput / p;
        }
    }
    return radiance;
}

}  // namespace detail_render

// Deterministic for a fixed (scene, seed) regardless of thread count: the
// sample RNG is keyed on (seed, pixel, sample index) only.
inline Image render(const TraceScene& scene, RenderStats* stats = nullptr) {
    const int w = scene.camera.width;
    const int h = scene.camera.height;
    const int spp = scene.settings.samples_per_pixel;
    Image img(w, h);

    int threads = scene.settings.threads;
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    threads = std::min(threads, h);

    std::atomic<int> next_row{0};
    std::atomic<long long> depth_cutoffs{0}, nonfinite{0}, inconsistent{0};
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mutex;
    auto t0 = std::chrono::steady_clock::now();

    auto worker = [&]() {
        try {
            for (int y = next_row.fetch_add(1); y < h; y = next_row.fetch_add(1)) {
                if (failed.load(std::memory_order_relaxed)) return;
                for (int x = 0; x < w; ++x) {
                    RGB acc{0.0, 0.0, 0.0};
                    for (int s = 0; s < spp; ++s) {
                        PathRng rng(scene.settings.seed, static_cast<uint32_t>(x),
                                    static_cast<uint32_t>(y), static_cast<uint32_t>(s));
                        Vec2 jitter = rng.next2();
                        Ray ray = scene.camera.generate_ray(x + jitter.x, y + jitter.y);
                        detail_render::PathCounters pc;
                        RGB sample = detail_render::trace_path(scene, ray, rng, pc);
                        if (pc.depth_cutoff) depth_cutoffs.fetch_add(1);
                        if (pc.inconsistent) {
                            inconsistent.fetch_add(1);
                            if (scene.settings.strict)
                                throw RenderError("medium stack inconsistency at pixel (" +
                                                  std::to_string(x) + ", " + std::to_string(y) +
                                                  ")");
                            continue;
                        }
                        bool finite = std::isfinite(sample.r) && std::isfinite(sample.g) &&
                                      std::isfinite(sample.b);
                        if (!finite) {
                            nonfinite.fetch_add(1);
                            if (scene.settings.strict)
                                throw RenderError("non-finite radiance at pixel (" +
                                                  std::to_string(x) + ", " + std::to_string(y) +
                                                  ")");
                            continue;
                        }
                        acc += sample;
                    }
                    img.at(x, y) = acc / static_cast<double>(spp);
                }
            }
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            failed.store(true);
            if (failure.empty()) failure = e.what();
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failed.load()) throw RenderError(failure);

    if (stats) {
        stats->paths = static_cast<long long>(w) * h * spp;
        stats->depth_cutoffs = depth_cutoffs.load();
        stats->nonfinite_samples = nonfinite.load();
        stats->inconsistent_paths = inconsistent.load();
        stats->seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    return img;
}

inline Image render_config(const SceneConfig& cfg, RenderStats* stats = nullptr) {
    return render(build_scene(cfg), stats);
}

}  // namespace orb
