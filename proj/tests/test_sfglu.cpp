#include <doctest.h>

#include <cmath>

#include "camokit/rng.hpp"
#include "camokit/sfglu.hpp"

using namespace camokit;

namespace {

FeatureMap random_map(std::size_t h, std::size_t w, std::size_t c,
                      CounterRng& rng) {
    FeatureMap z(h, w, c);
    for (double& v : z.data) v = rng.next_gaussian();
    return z;
}

SimilarityField random_similarity(std::size_t n, CounterRng& rng) {
    SimilarityField s;
    for (std::size_t i = 0; i < n; ++i) {
        s.scores.push_back(sigmoid(rng.next_gaussian()));
    }
    return s;
}

double rel_err(double a, double b) {
    return std::abs(a - b) / (std::max(std::abs(a), std::abs(b)) + 1e-6);
}

// dLoss/dOut for the random linear loss sum_i g_i * out_i.
FeatureMap linear_loss_grad(std::size_t h, std::size_t w, std::size_t c,
                            CounterRng& rng) {
    FeatureMap g(h, w, c);
    for (double& v : g.data) v = rng.next_gaussian();
    return g;
}

double linear_loss(const FeatureMap& out, const FeatureMap& g) {
    double s = 0.0;
    for (std::size_t i = 0; i < out.data.size(); ++i) s += out.data[i] * g.data[i];
    return s;
}

}  // namespace

TEST_CASE("region_scores: orthogonal text gives sigma(0), saturation reaches 1") {
    EmbeddingField field =
        EmbeddingField::from({Vector{0.0, 1.0, 0.0}, Vector{0.0, 0.0, 1.0}});
    FusedClassEmbedding fused;
    fused.vector = {1.0, 0.0, 0.0};
    const SimilarityField s = region_scores(std::vector{fused}, field);
    CHECK(s.scores[0] == doctest::Approx(0.5));
    CHECK(s.scores[1] == doctest::Approx(0.5));

    FusedClassEmbedding strong;
    strong.vector = {0.0, 100.0, 0.0};
    const SimilarityField sat = region_scores(std::vector{strong}, field);
    CHECK(sat.scores[0] == doctest::Approx(1.0));

    CHECK_THROWS_AS(region_scores(std::vector<FusedClassEmbedding>{}, field),
                    ValidationError);
}

TEST_CASE("region_scores matches a brute-force max over classes") {
    CounterRng rng = CounterRng::for_stream(211, 0);
    std::vector<Vector> embeddings;
    for (int i = 0; i < 4; ++i) embeddings.push_back(rng.gaussian_vector(6, 1.0));
    const EmbeddingField field = EmbeddingField::from(embeddings);
    std::vector<FusedClassEmbedding> fused(3);
    for (auto& f : fused) f.vector = rng.gaussian_vector(6, 1.0);

    const SimilarityField s = region_scores(fused, field);
    for (std::size_t j = 0; j < embeddings.size(); ++j) {
        double best = -1e300;
        for (const auto& f : fused) {
            best = std::max(best, dot(f.vector, embeddings[j]));
        }
        CHECK(s.scores[j] == doctest::Approx(sigmoid(best)).epsilon(1e-12));
        CHECK(s.scores[j] > 0.0);
        CHECK(s.scores[j] < 1.0);
    }
}

TEST_CASE("target_patch: ties break low, argmax matches linear scan") {
    CHECK(target_patch(SimilarityField{{0.1, 0.9, 0.9}}) == 1);
    CHECK(target_patch(SimilarityField{{0.4, 0.4, 0.4}}) == 0);

    CounterRng rng = CounterRng::for_stream(223, 0);
    const SimilarityField s = random_similarity(100, rng);
    std::size_t best = 0;
    for (std::size_t j = 1; j < 100; ++j) {
        if (s.scores[j] > s.scores[best]) best = j;
    }
    CHECK(target_patch(s) == best);

    // Any strictly increasing transform leaves the argmax unchanged.
    SimilarityField warped;
    for (double v : s.scores) warped.scores.push_back(sigmoid(3.0 * v - 1.0));
    CHECK(target_patch(warped) == best);
}

TEST_CASE("patch grid coordinates and spatial distances") {
    const PatchGrid grid = PatchGrid::regular(2, 2);
    CHECK(grid.coords[0][0] == doctest::Approx(0.25));
    CHECK(grid.coords[0][1] == doctest::Approx(0.25));
    CHECK(grid.coords[3][0] == doctest::Approx(0.75));

    const Vector d = spatial_distances(grid, 0, 1e-8);
    CHECK(d[0] == doctest::Approx(1e-8));  // the target itself is clamped
    CHECK(d[3] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(d[1] == doctest::Approx(0.5).epsilon(1e-12));

    for (double v : d) CHECK(v <= std::sqrt(2.0));

    CHECK_THROWS_AS(spatial_distances(grid, 9, 1e-8), ValidationError);
    CHECK_THROWS_AS(spatial_distances(grid, 0, 0.0), ValidationError);
}

TEST_CASE("sfglu_gate reference behaviour") {
    CounterRng rng = CounterRng::for_stream(227, 0);
    const std::size_t h = 2, w = 2, c = 3;
    const FeatureMap z = random_map(h, w, c, rng);
    const SimilarityField s = random_similarity(h * w, rng);
    const PatchGrid grid = PatchGrid::regular(h, w);
    const Vector d = spatial_distances(grid, 0, 1e-8);
    GateConfig cfg;

    SUBCASE("zero conv forces a uniform gain of 1.5") {
        GateConvParams conv{Vector(c, 0.0), Vector(c, 0.0)};
        const FeatureMap out = sfglu_gate(z, s, d, conv, cfg);
        for (std::size_t i = 0; i < z.data.size(); ++i) {
            CHECK(out.data[i] == doctest::Approx(1.5 * z.data[i]).epsilon(1e-12));
        }
    }

    SUBCASE("zero input stays zero") {
        GateConvParams conv{Vector(c, 1.0), Vector(c, 0.0)};
        const FeatureMap out = sfglu_gate(FeatureMap(h, w, c), s, d, conv, cfg);
        for (double v : out.data) CHECK(v == 0.0);
    }

    SUBCASE("the clamped target patch saturates toward gain 2") {
        FeatureMap ones(h, w, c);
        for (double& v : ones.data) v = 1.0;
        GateConvParams conv{Vector(c, 1.0), Vector(c, 0.0)};
        const FeatureMap out = sfglu_gate(ones, s, d, conv, cfg);
        for (std::size_t ch = 0; ch < c; ++ch) {
            CHECK(out.at(0, ch) == doctest::Approx(2.0).epsilon(1e-9));
        }
    }

    SUBCASE("shape and config validation") {
        GateConvParams conv{Vector(c, 0.0), Vector(c, 0.0)};
        SimilarityField wrong;
        wrong.scores = {0.5};
        CHECK_THROWS_AS(sfglu_gate(z, wrong, d, conv, cfg), ValidationError);
        GateConfig bad;
        bad.temperature = 0.0;
        CHECK_THROWS_AS(sfglu_gate(z, s, d, conv, bad), ValidationError);
    }
}

TEST_CASE("sfglu gain bound: strict sign-preserving amplification") {
    CounterRng rng = CounterRng::for_stream(229, 0);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t h = 1 + rng.next_below(4);
        const std::size_t w = 1 + rng.next_below(4);
        const std::size_t c = 1 + rng.next_below(4);
        const FeatureMap z = random_map(h, w, c, rng);
        const SimilarityField s = random_similarity(h * w, rng);
        const PatchGrid grid = PatchGrid::regular(h, w);
        GateConfig cfg;
        cfg.alpha = 0.25 + 2.0 * rng.next_double();
        const Vector d =
            spatial_distances(grid, rng.next_below(h * w), cfg.epsilon);
        GateConvParams conv{rng.gaussian_vector(c, 2.0), rng.gaussian_vector(c, 2.0)};

        const FeatureMap out = sfglu_gate(z, s, d, conv, cfg);
        for (std::size_t i = 0; i < z.data.size(); ++i) {
            CHECK(std::isfinite(out.data[i]));
            if (z.data[i] != 0.0) {
                CHECK(std::signbit(out.data[i]) == std::signbit(z.data[i]));
                CHECK(std::abs(out.data[i]) > std::abs(z.data[i]));
                CHECK(std::abs(out.data[i]) <
                      (1.0 + cfg.alpha) * std::abs(z.data[i]));
            }
        }
    }
}

TEST_CASE("sfglu monotone focusing: farther patches gain less") {
    // Hold S fixed and positive conv weight; the gain must not increase with
    // distance.
    const std::size_t h = 1, w = 8, c = 1;
    FeatureMap ones(h, w, c);
    for (double& v : ones.data) v = 1.0;
    SimilarityField s;
    s.scores.assign(h * w, 0.7);
    const PatchGrid grid = PatchGrid::regular(h, w);
    GateConfig cfg;
    const Vector d = spatial_distances(grid, 0, cfg.epsilon);
    GateConvParams conv{Vector(c, 2.0), Vector(c, -1.0)};
    const FeatureMap out = sfglu_gate(ones, s, d, conv, cfg);
    for (std::size_t j = 1; j < w; ++j) {
        CHECK(out.at(j, 0) <= out.at(j - 1, 0) + 1e-12);
    }
}

TEST_CASE("sfglu gradients match finite differences with the target detached") {
    CounterRng rng = CounterRng::for_stream(233, 0);
    const std::size_t h = 4, w = 4, c = 3;
    for (int trial = 0; trial < 5; ++trial) {
        FeatureMap z = random_map(h, w, c, rng);
        SimilarityField s = random_similarity(h * w, rng);
        const PatchGrid grid = PatchGrid::regular(h, w);
        GateConfig cfg;
        const std::size_t target = target_patch(s);
        const Vector d = spatial_distances(grid, target, cfg.epsilon);
        GateConvParams conv{rng.gaussian_vector(c, 1.0), rng.gaussian_vector(c, 1.0)};
        const FeatureMap loss_grad = linear_loss_grad(h, w, c, rng);

        const SfgluGradients grads =
            sfglu_gate_backward(z, s, d, conv, cfg, loss_grad);

        const double step = 1e-5;
        double max_rel = 0.0;
        for (std::size_t i = 0; i < z.data.size(); ++i) {
            const double orig = z.data[i];
            z.data[i] = orig + step;
            const double up = linear_loss(sfglu_gate(z, s, d, conv, cfg), loss_grad);
            z.data[i] = orig - step;
            const double down = linear_loss(sfglu_gate(z, s, d, conv, cfg), loss_grad);
            z.data[i] = orig;
            max_rel = std::max(max_rel,
                               rel_err(grads.z.data[i], (up - down) / (2 * step)));
        }
        for (std::size_t ch = 0; ch < c; ++ch) {
            double orig = conv.weight[ch];
            conv.weight[ch] = orig + step;
            double up = linear_loss(sfglu_gate(z, s, d, conv, cfg), loss_grad);
            conv.weight[ch] = orig - step;
            double down = linear_loss(sfglu_gate(z, s, d, conv, cfg), loss_grad);
            conv.weight[ch] = orig;
            max_rel = std::max(
                max_rel, rel_err(grads.conv_weight[ch], (up - down) / (2 * step)));

            orig = conv.bias[ch];
            conv.bias[ch] = orig + step;
            up = linear_loss(sfglu_gate(z, s, d, conv, cfg), loss_grad);
            conv.bias[ch] = orig - step;
            down = linear_loss(sfglu_gate(z, s, d, conv, cfg), loss_grad);
            conv.bias[ch] = orig;
            max_rel = std::max(max_rel,
                               rel_err(grads.conv_bias[ch], (up - down) / (2 * step)));
        }
        // S gradients, with d (and therefore the target) held fixed.
        for (std::size_t j = 0; j < s.scores.size(); ++j) {
            const double orig = s.scores[j];
            s.scores[j] = orig + step;
            const double up = linear_loss(sfglu_gate(z, s, d, conv, cfg), loss_grad);
            s.scores[j] = orig - step;
            const double down = linear_loss(sfglu_gate(z, s, d, conv, cfg), loss_grad);
            s.scores[j] = orig;
            max_rel = std::max(max_rel,
                               rel_err(grads.scores[j], (up - down) / (2 * step)));
        }
        CHECK(max_rel <= 1e-4);
    }
}

TEST_CASE("glu baseline: reference values and gradients") {
    CounterRng rng = CounterRng::for_stream(239, 0);
    const std::size_t h = 4, w = 4, c = 3;
    FeatureMap z = random_map(h, w, c, rng);

    SUBCASE("zero affine halves the input") {
        ChannelAffine params{Vector(c, 0.0), Vector(c, 0.0)};
        const FeatureMap out = glu_baseline(z, params);
        for (std::size_t i = 0; i < z.data.size(); ++i) {
            CHECK(out.data[i] == doctest::Approx(0.5 * z.data[i]).epsilon(1e-12));
        }
    }

    SUBCASE("zero input maps to zero") {
        ChannelAffine params{rng.gaussian_vector(c, 1.0), rng.gaussian_vector(c, 1.0)};
        const FeatureMap out = glu_baseline(FeatureMap(h, w, c), params);
        for (double v : out.data) CHECK(v == 0.0);
    }

    SUBCASE("gradient check") {
        ChannelAffine params{rng.gaussian_vector(c, 1.0), rng.gaussian_vector(c, 1.0)};
        const FeatureMap loss_grad = linear_loss_grad(h, w, c, rng);
        const GluGradients grads = glu_backward(z, params, loss_grad);

        const double step = 1e-5;
        double max_rel = 0.0;
        for (std::size_t i = 0; i < z.data.size(); ++i) {
            const double orig = z.data[i];
            z.data[i] = orig + step;
            const double up = linear_loss(glu_baseline(z, params), loss_grad);
            z.data[i] = orig - step;
            const double down = linear_loss(glu_baseline(z, params), loss_grad);
            z.data[i] = orig;
            max_rel = std::max(max_rel,
                               rel_err(grads.z.data[i], (up - down) / (2 * step)));
        }
        for (std::size_t ch = 0; ch < c; ++ch) {
            for (auto [vec_ptr, grad] :
                 {std::pair{&params.weight, grads.weight[ch]},
                  std::pair{&params.bias, grads.bias[ch]}}) {
                const double orig = (*vec_ptr)[ch];
                (*vec_ptr)[ch] = orig + step;
                const double up = linear_loss(glu_baseline(z, params), loss_grad);
                (*vec_ptr)[ch] = orig - step;
                const double down = linear_loss(glu_baseline(z, params), loss_grad);
                (*vec_ptr)[ch] = orig;
                max_rel = std::max(max_rel, rel_err(grad, (up - down) / (2 * step)));
            }
        }
        CHECK(max_rel <= 1e-4);
    }
}

TEST_CASE("swiglu baseline: reference values and gradients") {
    CounterRng rng = CounterRng::for_stream(241, 0);
    const std::size_t h = 4, w = 4, c = 3;
    FeatureMap z = random_map(h, w, c, rng);

    SUBCASE("zero input with zero biases maps to zero") {
        SwigluParams params;
        params.value = {rng.gaussian_vector(c, 1.0), Vector(c, 0.0)};
        params.gate = {rng.gaussian_vector(c, 1.0), Vector(c, 0.0)};
        const FeatureMap out = swiglu_baseline(FeatureMap(h, w, c), params);
        for (double v : out.data) CHECK(v == 0.0);
    }

    SUBCASE("identity affines on a unit scalar give swish(1)") {
        FeatureMap one(1, 1, 1);
        one.data[0] = 1.0;
        SwigluParams params;
        params.value = {Vector(1, 1.0), Vector(1, 0.0)};
        params.gate = {Vector(1, 1.0), Vector(1, 0.0)};
        const FeatureMap out = swiglu_baseline(one, params);
        CHECK(out.data[0] == doctest::Approx(sigmoid(1.0)).epsilon(1e-9));
        CHECK(out.data[0] == doctest::Approx(0.731059).epsilon(1e-6));
    }

    SUBCASE("gradient check") {
        SwigluParams params;
        params.value = {rng.gaussian_vector(c, 1.0), rng.gaussian_vector(c, 1.0)};
        params.gate = {rng.gaussian_vector(c, 1.0), rng.gaussian_vector(c, 1.0)};
        const FeatureMap loss_grad = linear_loss_grad(h, w, c, rng);
        const SwigluGradients grads = swiglu_backward(z, params, loss_grad);

        const double step = 1e-5;
        double max_rel = 0.0;
        for (std::size_t i = 0; i < z.data.size(); ++i) {
            const double orig = z.data[i];
            z.data[i] = orig + step;
            const double up = linear_loss(swiglu_baseline(z, params), loss_grad);
            z.data[i] = orig - step;
            const double down = linear_loss(swiglu_baseline(z, params), loss_grad);
            z.data[i] = orig;
            max_rel = std::max(max_rel,
                               rel_err(grads.z.data[i], (up - down) / (2 * step)));
        }
        struct Param {
            Vector* values;
            const Vector* grads;
        };
        for (const Param& p :
             {Param{&params.value.weight, &grads.value_weight},
              Param{&params.value.bias, &grads.value_bias},
              Param{&params.gate.weight, &grads.gate_weight},
              Param{&params.gate.bias, &grads.gate_bias}}) {
            for (std::size_t ch = 0; ch < c; ++ch) {
                const double orig = (*p.values)[ch];
                (*p.values)[ch] = orig + step;
                const double up = linear_loss(swiglu_baseline(z, params), loss_grad);
                (*p.values)[ch] = orig - step;
                const double down = linear_loss(swiglu_baseline(z, params), loss_grad);
                (*p.values)[ch] = orig;
                max_rel = std::max(
                    max_rel, rel_err((*p.grads)[ch], (up - down) / (2 * step)));
            }
        }
        CHECK(max_rel <= 1e-4);
    }
}

TEST_CASE("no non-finite outputs under epsilon clamping") {
    CounterRng rng = CounterRng::for_stream(251, 0);
    const std::size_t h = 3, w = 3, c = 2;
    FeatureMap z = random_map(h, w, c, rng);
    SimilarityField s;
    s.scores.assign(h * w, 1e-30);  // effectively zero similarity
    s.scores[4] = 0.999999;
    const PatchGrid grid = PatchGrid::regular(h, w);
    GateConfig cfg;
    const Vector d = spatial_distances(grid, 4, cfg.epsilon);
    GateConvParams conv{Vector(c, 100.0), Vector(c, -50.0)};
    const FeatureMap out = sfglu_gate(z, s, d, conv, cfg);
    for (double v : out.data) CHECK(std::isfinite(v));
}
