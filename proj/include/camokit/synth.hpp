#pragma once

#include <cstdint>
#include <vector>

#include "camokit/eval.hpp"
#include "camokit/rng.hpp"
#include "camokit/sfglu.hpp"
#include "camokit/textfusion.hpp"

namespace camokit {

/// Knobs for the synthetic camouflage benchmark. `camouflage` mixes the
/// background direction into object embeddings (1 = indistinguishable);
/// `decoy_fraction` of each class's sub-descriptions describe the background
/// instead of the object.
struct SynthConfig {
    std::uint64_t seed = 0;
    std::size_t embedding_dim = 16;
    std::size_t grid_height = 8;
    std::size_t grid_width = 8;
    std::size_t channels = 16;
    std::size_t num_classes = 1;
    std::size_t subs_per_class = 13;
    double camouflage = 0.8;
    double decoy_fraction = 0.3;
    std::size_t scenes = 8;
};

void validate_config(const SynthConfig& cfg);

struct SynthObject {
    int class_id = 0;
    std::vector<std::size_t> cells;  // patch indices of the object block
    std::size_t center_cell = 0;     // refiner-assigned positive sample
    BBox box;
    double kappa = 0.0;      // per-object camouflage strength
    bool attenuated = false; // boundary cells fade into the background
};

struct SynthScene {
    std::size_t height = 0, width = 0, channels = 0;
    FeatureMap features;
    EmbeddingField field;
    std::vector<SynthObject> objects;
    std::vector<GroundTruthRecord> ground_truth;  // one per object, in order
    std::vector<SubDescriptionSet> sub_descriptions;  // one per class id
    Matrix projection;  // D x C, orthonormal columns; features = P^T embedding
    int scene_index = 0;
};

/// Deterministic in (cfg.seed, scene_index). Objects are 3x3 patch blocks
/// with a slightly more distinctive center cell; odd-indexed objects fade
/// toward the background at their boundary. Throws when the grid cannot hold
/// the requested number of objects.
SynthScene generate_scene(const SynthConfig& cfg, int scene_index);

/// Nominal pixel side length used to give synthetic boxes a pixel area.
inline constexpr double kNominalImageSide = 256.0;

/// Camouflage difficulty of one object: image-level similarity of the object
/// embedding mix weighted against its relative size.
double scene_difficulty_score(const SynthScene& scene, std::size_t object_index);

}  // namespace camokit
