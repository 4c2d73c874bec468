#include "camokit/synth.hpp"

#include <algorithm>
#include <cmath>

namespace camokit {

namespace {

constexpr std::size_t kBlock = 3;          // object side length in patches
constexpr double kBackgroundNoise = 0.02;  // per-coordinate embedding noise
constexpr double kSubNoise = 0.06;         // sub-description jitter
constexpr double kKappaJitterLo = 0.875;   // per-object camouflage spread
constexpr double kKappaJitterHi = 1.0;
constexpr double kKappaCap = 0.97;
constexpr double kCenterBonus = 0.12;      // center cell is this much less camouflaged
constexpr double kEdgeFade = 0.6;          // attenuated boundary magnitude
constexpr double kEdgeBlend = 0.35;        // attenuated boundary pull toward background

Vector mix_direction(const Vector& background, const Vector& prototype,
                     double kappa) {
    Vector dir(background.size());
    for (std::size_t i = 0; i < dir.size(); ++i) {
        dir[i] = kappa * background[i] + (1.0 - kappa) * prototype[i];
    }
    return vec::normalized(dir);
}

// Random D x C matrix with orthonormal columns.
Matrix random_projection(std::size_t dim, std::size_t channels, CounterRng& rng) {
    Matrix cols(channels, dim);  // build rows, orthonormalize, then transpose
    for (std::size_t c = 0; c < channels; ++c) {
        Vector v = rng.gaussian_vector(dim, 1.0);
        std::copy(v.begin(), v.end(), cols.row(c).begin());
    }
    GramSchmidtResult gs = gram_schmidt_rows(cols);
    while (gs.kept.size() < channels) {
        // A degenerate draw; extend with fresh directions.
        Matrix retry(channels, dim);
        for (std::size_t c = 0; c < gs.kept.size(); ++c) {
            std::copy(gs.rows.row(c).begin(), gs.rows.row(c).end(),
                      retry.row(c).begin());
        }
        for (std::size_t c = gs.kept.size(); c < channels; ++c) {
            Vector v = rng.gaussian_vector(dim, 1.0);
            std::copy(v.begin(), v.end(), retry.row(c).begin());
        }
        gs = gram_schmidt_rows(retry);
    }
    return gs.rows.transposed();  // D x C
}

}  // namespace

void validate_config(const SynthConfig& cfg) {
    if (cfg.embedding_dim < 2 || cfg.grid_height < 1 || cfg.grid_width < 1 ||
        cfg.channels < 1 || cfg.scenes < 1) {
        throw ValidationError("synth config: dimensions must be positive");
    }
    if (cfg.num_classes > 0 && cfg.subs_per_class < 1) {
        throw ValidationError("synth config: need at least one sub-description");
    }
    if (cfg.camouflage < 0.0 || cfg.camouflage > 1.0) {
        throw ValidationError("synth config: camouflage must be in [0, 1]");
    }
    if (cfg.decoy_fraction < 0.0 || cfg.decoy_fraction > 1.0) {
        throw ValidationError("synth config: decoy_fraction must be in [0, 1]");
    }
    if (cfg.channels > cfg.embedding_dim) {
        throw ValidationError("synth config: channels must not exceed embedding dim");
    }
    if (cfg.embedding_dim < cfg.num_classes + 1) {
        throw ValidationError("synth config: embedding dim too small for class count");
    }
}

SynthScene generate_scene(const SynthConfig& cfg, int scene_index) {
    validate_config(cfg);
    CounterRng rng = CounterRng::for_stream(cfg.seed, 0x5CE4Eu,
                                            static_cast<std::uint64_t>(scene_index));

    const std::size_t h = cfg.grid_height;
    const std::size_t w = cfg.grid_width;
    const std::size_t dim = cfg.embedding_dim;
    const std::size_t n_cells = h * w;

    SynthScene scene;
    scene.scene_index = scene_index;
    scene.height = h;
    scene.width = w;
    scene.channels = cfg.channels;

    const Vector background = rng.unit_vector(dim);

    // Class prototypes orthogonal to the background and to each other keeps
    // the camouflage coefficient the only object/background coupling.
    std::vector<Vector> prototypes;
    for (std::size_t c = 0; c < cfg.num_classes; ++c) {
        Matrix span(prototypes.size() + 2, dim);
        std::copy(background.begin(), background.end(), span.row(0).begin());
        for (std::size_t p = 0; p < prototypes.size(); ++p) {
            std::copy(prototypes[p].begin(), prototypes[p].end(),
                      span.row(p + 1).begin());
        }
        Vector candidate = rng.unit_vector(dim);
        std::copy(candidate.begin(), candidate.end(),
                  span.row(prototypes.size() + 1).begin());
        GramSchmidtResult gs = gram_schmidt_rows(span);
        if (gs.kept.size() != span.rows) {
            // Astronomically unlikely collision with the existing span.
            --c;
            continue;
        }
        prototypes.emplace_back(gs.rows.row(span.rows - 1).begin(),
                                gs.rows.row(span.rows - 1).end());
    }

    // Place non-touching blocks.
    if (cfg.num_classes > 0 && (h < kBlock || w < kBlock)) {
        throw ValidationError("generate_scene: grid smaller than one object block");
    }
    std::vector<std::pair<std::size_t, std::size_t>> corners;
    for (std::size_t obj = 0; obj < cfg.num_classes; ++obj) {
        bool placed = false;
        for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
            const std::size_t r0 = rng.next_below(h - kBlock + 1);
            const std::size_t c0 = rng.next_below(w - kBlock + 1);
            placed = true;
            for (const auto& [pr, pc] : corners) {
                const auto gap = [](std::size_t a, std::size_t b) {
                    return a > b ? a - b : b - a;
                };
                if (gap(r0, pr) < kBlock + 1 && gap(c0, pc) < kBlock + 1) {
                    placed = false;
                    break;
                }
            }
            if (placed) corners.emplace_back(r0, c0);
        }
        if (!placed) {
            throw ValidationError("generate_scene: grid too small for requested objects");
        }
    }

    // Background everywhere, objects overwrite their block.
    std::vector<Vector> embeddings(n_cells);
    for (std::size_t j = 0; j < n_cells; ++j) {
        embeddings[j] = background;
        vec::add_inplace(embeddings[j], rng.gaussian_vector(dim, kBackgroundNoise));
    }

    for (std::size_t obj = 0; obj < cfg.num_classes; ++obj) {
        const auto [r0, c0] = corners[obj];
        SynthObject object;
        object.class_id = static_cast<int>(obj);
        object.attenuated = (scene_index + static_cast<int>(obj)) % 2 == 1;
        object.kappa = std::clamp(
            cfg.camouflage * rng.next_range(kKappaJitterLo, kKappaJitterHi), 0.0,
            kKappaCap);
        const double kappa_center = std::max(object.kappa - kCenterBonus, 0.0);
        const double kappa_edge =
            object.attenuated ? object.kappa + kEdgeBlend * (1.0 - object.kappa)
                              : object.kappa;
        const double magnitude_edge = object.attenuated ? kEdgeFade : 1.0;

        object.center_cell = (r0 + kBlock / 2) * w + (c0 + kBlock / 2);
        for (std::size_t dr = 0; dr < kBlock; ++dr) {
            for (std::size_t dc = 0; dc < kBlock; ++dc) {
                const std::size_t cell = (r0 + dr) * w + (c0 + dc);
                object.cells.push_back(cell);
                const bool is_center = cell == object.center_cell;
                const Vector dir = mix_direction(
                    background, prototypes[obj],
                    is_center ? kappa_center : kappa_edge);
                // Attenuated objects fade as a whole; the center keeps its
                // sharper direction so the most specific patch stays put.
                const double magnitude = magnitude_edge;
                embeddings[cell] = vec::scaled(dir, magnitude);
                vec::add_inplace(embeddings[cell],
                                 rng.gaussian_vector(dim, kBackgroundNoise));
            }
        }

        object.box = BBox{static_cast<double>(c0) / w, static_cast<double>(r0) / h,
                          static_cast<double>(c0 + kBlock) / w,
                          static_cast<double>(r0 + kBlock) / h};

        GroundTruthRecord gt;
        gt.image_id = scene_index;
        gt.class_index = object.class_id;
        gt.box = object.box;
        gt.pixel_area = object.box.area() * kNominalImageSide * kNominalImageSide;
        scene.ground_truth.push_back(gt);
        scene.objects.push_back(std::move(object));
    }

    // Sub-descriptions: informative ones describe the prototype, decoys the
    // background; both normalized like encoder outputs.
    const std::size_t n_decoys = static_cast<std::size_t>(
        std::llround(cfg.decoy_fraction * static_cast<double>(cfg.subs_per_class)));
    for (std::size_t c = 0; c < cfg.num_classes; ++c) {
        Matrix subs(cfg.subs_per_class, dim);
        std::vector<std::string> labels;
        for (std::size_t k = 0; k < cfg.subs_per_class; ++k) {
            const bool decoy = k >= cfg.subs_per_class - n_decoys;
            const Vector& base = decoy ? background : prototypes[c];
            Vector v = base;
            vec::add_inplace(v, rng.gaussian_vector(dim, kSubNoise));
            v = vec::normalized(v);
            std::copy(v.begin(), v.end(), subs.row(k).begin());
            labels.push_back((decoy ? "decoy sub " : "specific sub ") +
                             std::to_string(k));
        }
        scene.sub_descriptions.push_back(
            make_subdescription_set(static_cast<int>(c), std::move(labels),
                                    std::move(subs)));
    }

    scene.field = EmbeddingField::from(std::move(embeddings));
    scene.projection = random_projection(dim, cfg.channels, rng);
    scene.features = FeatureMap(h, w, cfg.channels);
    for (std::size_t j = 0; j < n_cells; ++j) {
        for (std::size_t ch = 0; ch < cfg.channels; ++ch) {
            double s = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                s += scene.projection.at(d, ch) * scene.field.embeddings[j][d];
            }
            scene.features.at(j, ch) = s;
        }
    }
    return scene;
}

double scene_difficulty_score(const SynthScene& scene, std::size_t object_index) {
    const SynthObject& object = scene.objects.at(object_index);
    Vector mean(scene.field.mean.size(), 0.0);
    for (std::size_t cell : object.cells) {
        vec::add_inplace(mean, scene.field.embeddings[cell]);
    }
    for (double& v : mean) v /= static_cast<double>(object.cells.size());
    const double sim = cosine(mean, scene.field.mean);
    const double img_area = kNominalImageSide * kNominalImageSide;
    return difficulty_score(sim, object.box.area() * img_area, img_area);
}

}  // namespace camokit
