#include <doctest.h>

#include <cmath>

#include "camokit/textfusion.hpp"

using namespace camokit;

namespace {

Matrix rows_from(std::initializer_list<Vector> rows) {
    const std::size_t cols = rows.begin()->size();
    Matrix m(rows.size(), cols);
    std::size_t r = 0;
    for (const Vector& row : rows) {
        std::copy(row.begin(), row.end(), m.row(r++).begin());
    }
    return m;
}

double frob_diff(const Matrix& a, const Matrix& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double rel_err(double a, double b) {
    return std::abs(a - b) / (std::max(std::abs(a), std::abs(b)) + 1e-6);
}

}  // namespace

TEST_CASE("make_subdescription_set normalizes rows and validates") {
    SubDescriptionSet set = make_subdescription_set(
        3, {"first", "second"}, rows_from({{2.0, 0.0}, {3.0, 4.0}}));
    CHECK(norm(set.embeddings.row(0)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(norm(set.embeddings.row(1)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(set.embeddings.at(1, 0) == doctest::Approx(0.6));

    CHECK_THROWS_AS(
        make_subdescription_set(0, {}, rows_from({{0.0, 0.0}})), ValidationError);
    CHECK_THROWS_AS(
        make_subdescription_set(0, {"one"}, rows_from({{1.0, 0.0}, {0.0, 1.0}})),
        ValidationError);
}

TEST_CASE("decorrelate: pass-through below the rank floor") {
    const SubDescriptionSet two = make_subdescription_set(
        0, {}, rows_from({{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}}));
    const Matrix out = decorrelate(two, 10, 3);
    CHECK(frob_diff(out, two.embeddings) == doctest::Approx(0.0));
}

TEST_CASE("decorrelate: identical rows unchanged, large sets rank-limited") {
    Matrix same(5, 4);
    for (std::size_t r = 0; r < 5; ++r) {
        same.at(r, 0) = 0.5;
        same.at(r, 2) = std::sqrt(0.75);
    }
    const SubDescriptionSet identical = make_subdescription_set(0, {}, same);
    CHECK(frob_diff(decorrelate(identical), identical.embeddings) <= 1e-12);

    CounterRng rng = CounterRng::for_stream(31, 0);
    Matrix big(25, 16);
    for (double& v : big.data) v = rng.next_gaussian();
    const SubDescriptionSet set = make_subdescription_set(1, {}, big);
    const Matrix refined = decorrelate(set);

    // Rank of the centered output must not exceed the default cap of 10.
    Vector mean(16, 0.0);
    for (std::size_t r = 0; r < refined.rows; ++r) {
        vec::add_inplace(mean, refined.row(r), 1.0 / 25.0);
    }
    Matrix centered(25, 16);
    for (std::size_t r = 0; r < 25; ++r) {
        for (std::size_t c = 0; c < 16; ++c) {
            centered.at(r, c) = refined.at(r, c) - mean[c];
        }
    }
    const SvdResult svd = svd_decompose(centered);
    for (std::size_t i = 10; i < svd.sigma.size(); ++i) {
        CHECK(svd.sigma[i] <= 1e-9 * svd.sigma[0]);
    }

    CHECK_THROWS_AS(decorrelate(set, 2, 3), ValidationError);
}

TEST_CASE("decorrelate never increases the centered Frobenius norm") {
    CounterRng rng = CounterRng::for_stream(37, 0);
    for (int trial = 0; trial < 10; ++trial) {
        Matrix m(14, 8);
        for (double& v : m.data) v = rng.next_gaussian();
        const SubDescriptionSet set = make_subdescription_set(0, {}, m);
        const Matrix refined = decorrelate(set, 5, 3);

        const auto centered_norm = [](const Matrix& x) {
            Vector mean(x.cols, 0.0);
            for (std::size_t r = 0; r < x.rows; ++r) {
                vec::add_inplace(mean, x.row(r), 1.0 / static_cast<double>(x.rows));
            }
            double s = 0.0;
            for (std::size_t r = 0; r < x.rows; ++r) {
                for (std::size_t c = 0; c < x.cols; ++c) {
                    const double d = x.at(r, c) - mean[c];
                    s += d * d;
                }
            }
            return std::sqrt(s);
        };
        CHECK(centered_norm(refined) <= centered_norm(set.embeddings) + 1e-12);
    }
}

TEST_CASE("adapter: identity configuration reproduces the input") {
    const AdapterParams id = AdapterParams::identity(4);
    const Vector t = {0.3, -1.2, 0.0, 2.5};
    const Vector out = adapter_forward(id, t);
    for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(out[i] == doctest::Approx(t[i]).epsilon(1e-15));
    }
}

TEST_CASE("adapter: zero weights leave only the final bias") {
    AdapterParams p = AdapterParams::identity(3);
    p.w1 = Matrix(3, 3);
    p.w2 = Matrix(3, 3);
    p.w3 = Matrix(3, 3);
    p.b3 = {1.5, -0.5, 2.0};
    p.hidden_activation = Activation::Sigmoid;
    for (const Vector& t : {Vector{1.0, 2.0, 3.0}, Vector{-4.0, 0.0, 1.0}}) {
        const Vector out = adapter_forward(p, t);
        CHECK(out[0] == doctest::Approx(1.5));
        CHECK(out[1] == doctest::Approx(-0.5));
        CHECK(out[2] == doctest::Approx(2.0));
    }
    CHECK_THROWS_AS(adapter_forward(p, Vector{1.0, 2.0}), ValidationError);
}

TEST_CASE("adapter gradients match finite differences") {
    CounterRng rng = CounterRng::for_stream(41, 0);
    const std::size_t dim = 8, hidden = 16;
    AdapterParams params = AdapterParams::random(dim, hidden, rng);
    const Vector t = rng.gaussian_vector(dim, 1.0);

    // Loss: squared norm of the output.
    const Vector out = adapter_forward(params, t);
    const AdapterGradients grads =
        adapter_backward(params, t, vec::scaled(out, 2.0));

    // Flatten every parameter tensor and the input into one vector and check
    // each analytic gradient coordinate against a central difference.
    struct Slot {
        double* value;
        double analytic;
    };
    std::vector<Slot> slots;
    auto add_matrix = [&](Matrix& m, const Matrix& g) {
        for (std::size_t i = 0; i < m.data.size(); ++i) {
            slots.push_back({&m.data[i], g.data[i]});
        }
    };
    auto add_vector = [&](Vector& v, const Vector& g) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            slots.push_back({&v[i], g[i]});
        }
    };
    Vector input = t;
    add_matrix(params.w1, grads.w1);
    add_vector(params.b1, grads.b1);
    add_matrix(params.w2, grads.w2);
    add_vector(params.b2, grads.b2);
    add_matrix(params.w3, grads.w3);
    add_vector(params.b3, grads.b3);
    add_vector(input, grads.input);

    const double h = 1e-5;
    double max_rel = 0.0;
    for (const Slot& slot : slots) {
        const double orig = *slot.value;
        *slot.value = orig + h;
        Vector up = adapter_forward(params, input);
        *slot.value = orig - h;
        Vector down = adapter_forward(params, input);
        *slot.value = orig;
        const double fd = (dot(up, up) - dot(down, down)) / (2.0 * h);
        max_rel = std::max(max_rel, rel_err(slot.analytic, fd));
    }
    CHECK(max_rel <= 1e-4);
}

TEST_CASE("contrastive_weights reference cases") {
    const Matrix refined = rows_from({{1.0, 0.0}, {0.0, 1.0}});
    const Vector e1 = {1.0, 0.0}, e2 = {0.0, 1.0};

    SUBCASE("equal views give uniform weights") {
        const FusionWeights w = contrastive_weights(e1, e1, refined);
        CHECK(w.raw_scores[0] == doctest::Approx(0.0));
        CHECK(w.raw_scores[1] == doctest::Approx(0.0));
        CHECK(w.normalized[0] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(w.normalized[1] == doctest::Approx(0.5).epsilon(1e-12));
    }

    SUBCASE("opposed views give the softmax of [1, -1]") {
        const FusionWeights w = contrastive_weights(e1, e2, refined);
        CHECK(w.raw_scores[0] == doctest::Approx(1.0));
        CHECK(w.raw_scores[1] == doctest::Approx(-1.0));
        CHECK(w.normalized[0] == doctest::Approx(0.880797).epsilon(1e-6));
        CHECK(w.normalized[1] == doctest::Approx(0.119203).epsilon(1e-6));
    }

    SUBCASE("permuting rows permutes weights") {
        const Vector v = {0.8, 0.6};
        const FusionWeights w = contrastive_weights(v, e2, refined);
        const FusionWeights p =
            contrastive_weights(v, e2, rows_from({{0.0, 1.0}, {1.0, 0.0}}));
        CHECK(w.normalized[0] == doctest::Approx(p.normalized[1]).epsilon(1e-15));
        CHECK(w.normalized[1] == doctest::Approx(p.normalized[0]).epsilon(1e-15));
    }

    SUBCASE("zero view vector is rejected") {
        CHECK_THROWS_AS(contrastive_weights(Vector{0.0, 0.0}, e2, refined),
                        DegenerateInputError);
    }
}

TEST_CASE("contrastive_weights: degenerate row gets the minimum score") {
    const Matrix refined =
        rows_from({{1.0, 0.0}, {0.0, 0.0}, {0.0, 1.0}});  // middle row is zero
    const FusionWeights w =
        contrastive_weights(Vector{1.0, 0.0}, Vector{0.0, 1.0}, refined);
    CHECK(w.degenerate);
    CHECK(w.raw_scores[1] == doctest::Approx(-1.0));  // min of {1, -1}
    CHECK(w.normalized[1] == doctest::Approx(w.normalized[2]).epsilon(1e-12));
}

TEST_CASE("contrastive invariants: positivity, sum, scale-invariant argmax") {
    CounterRng rng = CounterRng::for_stream(43, 1);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = 2 + rng.next_below(6);
        Matrix refined(k, 6);
        for (double& v : refined.data) v = rng.next_gaussian();
        const Vector vi = rng.gaussian_vector(6, 1.0);
        const Vector vg = rng.gaussian_vector(6, 1.0);
        const FusionWeights w = contrastive_weights(vi, vg, refined);

        double sum = 0.0;
        for (double b : w.normalized) {
            CHECK(b > 0.0);
            sum += b;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);

        const double a = 0.05 + 8.0 * rng.next_double();
        const double b = 0.05 + 8.0 * rng.next_double();
        const FusionWeights scaled =
            contrastive_weights(vec::scaled(vi, a), vec::scaled(vg, b), refined);
        for (std::size_t i = 0; i < k; ++i) {
            CHECK(std::abs(w.raw_scores[i] - scaled.raw_scores[i]) <= 1e-12);
        }
    }
}

TEST_CASE("fuse_contrastive reference cases and span property") {
    SUBCASE("single row is returned as-is") {
        const Matrix one = rows_from({{0.6, 0.8}});
        FusionWeights w;
        w.normalized = {1.0};
        const FusedClassEmbedding out = fuse_contrastive(w, one, 7);
        CHECK(out.class_id == 7);
        CHECK(out.vector[0] == doctest::Approx(0.6));
        CHECK(out.vector[1] == doctest::Approx(0.8));
    }

    SUBCASE("uniform weights average the basis rows") {
        FusionWeights w;
        w.normalized = {0.5, 0.5};
        const FusedClassEmbedding out =
            fuse_contrastive(w, rows_from({{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}}));
        CHECK(out.vector[0] == doctest::Approx(0.5));
        CHECK(out.vector[1] == doctest::Approx(0.5));
        CHECK(out.vector[2] == doctest::Approx(0.0));
    }

    SUBCASE("one-hot weights copy that row") {
        FusionWeights w;
        w.normalized = {0.0, 1.0, 0.0};
        const Matrix rows =
            rows_from({{1.0, 0.0}, {0.6, -0.8}, {0.0, 1.0}});
        const FusedClassEmbedding out = fuse_contrastive(w, rows);
        CHECK(out.vector[0] == doctest::Approx(0.6));
        CHECK(out.vector[1] == doctest::Approx(-0.8));
    }

    SUBCASE("output lies in the row span") {
        CounterRng rng = CounterRng::for_stream(47, 0);
        for (int trial = 0; trial < 20; ++trial) {
            Matrix refined(3, 8);
            for (double& v : refined.data) v = rng.next_gaussian();
            const FusionWeights w = contrastive_weights(
                rng.gaussian_vector(8, 1.0), rng.gaussian_vector(8, 1.0), refined);
            const FusedClassEmbedding out = fuse_contrastive(w, refined);

            // Project onto the span and measure the residual.
            const GramSchmidtResult gs = gram_schmidt_rows(refined);
            Vector residual = out.vector;
            for (std::size_t b = 0; b < gs.rows.rows; ++b) {
                const double proj = dot(residual, gs.rows.row(b));
                vec::add_inplace(residual, gs.rows.row(b), -proj);
            }
            CHECK(norm(residual) <= 1e-10);
        }
    }
}

TEST_CASE("fuse_orthogonal reference cases") {
    SUBCASE("orthonormal rows with uniform weights give the mean") {
        const FusedClassEmbedding out =
            fuse_orthogonal(rows_from({{1.0, 0.0}, {0.0, 1.0}}));
        CHECK(out.vector[0] == doctest::Approx(0.5));
        CHECK(out.vector[1] == doctest::Approx(0.5));
    }

    SUBCASE("duplicate rows are dropped") {
        const FusedClassEmbedding out =
            fuse_orthogonal(rows_from({{1.0, 0.0}, {1.0, 0.0}}));
        CHECK(out.vector[0] == doctest::Approx(1.0));
        CHECK(out.vector[1] == doctest::Approx(0.0));

        // Appending a duplicate of an existing row never changes the result.
        const FusedClassEmbedding base =
            fuse_orthogonal(rows_from({{1.0, 0.0}, {0.0, 1.0}}));
        const FusedClassEmbedding extended =
            fuse_orthogonal(rows_from({{1.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}}));
        CHECK(base.vector[0] == doctest::Approx(extended.vector[0]).epsilon(1e-12));
        CHECK(base.vector[1] == doctest::Approx(extended.vector[1]).epsilon(1e-12));
    }

    SUBCASE("gram-schmidt by hand: {e1, e1+e2} becomes {e1, e2}") {
        const FusedClassEmbedding out =
            fuse_orthogonal(rows_from({{1.0, 0.0}, {1.0, 1.0}}));
        CHECK(out.vector[0] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(out.vector[1] == doctest::Approx(0.5).epsilon(1e-12));
    }

    SUBCASE("all-degenerate input is an error") {
        CHECK_THROWS_AS(fuse_orthogonal(rows_from({{0.0, 0.0}, {0.0, 0.0}})),
                        DegenerateInputError);
    }

    SUBCASE("contrastive weights are renormalized over kept rows") {
        FusionWeights w;
        w.normalized = {0.2, 0.3, 0.5};  // middle row duplicates the first
        const FusedClassEmbedding out = fuse_orthogonal(
            rows_from({{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}), &w);
        CHECK(out.vector[0] == doctest::Approx(0.2 / 0.7).epsilon(1e-12));
        CHECK(out.vector[1] == doctest::Approx(0.5 / 0.7).epsilon(1e-12));
    }
}

TEST_CASE("fuse_sum_normalize reference cases") {
    const SubDescriptionSet single =
        make_subdescription_set(2, {}, rows_from({{0.0, 2.0}}));
    const FusedClassEmbedding one = fuse_sum_normalize(single);
    CHECK(one.vector[0] == doctest::Approx(0.0));
    CHECK(one.vector[1] == doctest::Approx(1.0));

    const SubDescriptionSet pair = make_subdescription_set(
        0, {}, rows_from({{1.0, 0.0}, {0.0, 1.0}}));
    const FusedClassEmbedding diag = fuse_sum_normalize(pair);
    CHECK(diag.vector[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(diag.vector[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

    const SubDescriptionSet opposed = make_subdescription_set(
        0, {}, rows_from({{1.0, 0.0}, {-1.0, 0.0}}));
    CHECK_THROWS_AS(fuse_sum_normalize(opposed), DegenerateInputError);
}
