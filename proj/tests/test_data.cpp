#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

#include <cmath>
#include <cstring>

using gfsc::Labels;
using gfsc::Matrix;
using gfsc::SeededRng;

TEST_CASE("csv round trip is exact", "[data]") {
    testutil::TempDir dir;
    SeededRng rng(301);
    Matrix x = rng.normal_matrix(7, 4);
    x(0, 0) = 1e-300;
    x(1, 1) = -123456789.123456789;
    x(2, 2) = 3.0000000000000004;
    x(3, 3) = 0.0;
    const std::string path = dir.file("round.csv");
    gfsc::save_csv(x, path);
    const auto loaded = gfsc::load_csv(path);
    REQUIRE(loaded.features.rows() == 7);
    REQUIRE(loaded.features.cols() == 4);
    CHECK((loaded.features - x).cwiseAbs().maxCoeff() == 0.0);
    CHECK_FALSE(loaded.labels.has_value());
}

TEST_CASE("csv with a label column", "[data]") {
    testutil::TempDir dir;
    const std::string path = dir.file("labeled.csv");
    testutil::write_file(path, "1.5,2.5,5\n0.5,1.0,2\n2.0,3.0,5\n4.0,5.0,9\n");
    const auto data = gfsc::load_csv(path, true);
    REQUIRE(data.features.cols() == 2);
    REQUIRE(data.labels.has_value());
    // labels canonicalized by first occurrence: 5 -> 0, 2 -> 1, 9 -> 2
    CHECK(*data.labels == Labels{0, 1, 0, 2});
    CHECK(data.groups() == 3);
    CHECK(data.features(0, 0) == 1.5);
}

TEST_CASE("csv tolerates blank lines and CRLF", "[data]") {
    testutil::TempDir dir;
    const std::string path = dir.file("messy.csv");
    testutil::write_file(path, "1,2\r\n\r\n3,4\n\n  \n5,6\n");
    const auto data = gfsc::load_csv(path);
    REQUIRE(data.features.rows() == 3);
    CHECK(data.features(1, 0) == 3.0);
    CHECK(data.features(2, 1) == 6.0);
}

TEST_CASE("csv parse failures carry positions", "[data]") {
    testutil::TempDir dir;
    const std::string missing = dir.file("nope.csv");
    CHECK_THROWS_AS(gfsc::load_csv(missing), gfsc::IoError);

    const std::string ragged = dir.file("ragged.csv");
    testutil::write_file(ragged, "1,2\n3,4,5\n");
    CHECK_THROWS_WITH(gfsc::load_csv(ragged), Catch::Matchers::ContainsSubstring("row 2"));

    const std::string junk = dir.file("junk.csv");
    testutil::write_file(junk, "1,2\n3,abc\n");
    CHECK_THROWS_WITH(gfsc::load_csv(junk),
                      Catch::Matchers::ContainsSubstring("row 2, column 2"));

    const std::string nonfinite = dir.file("inf.csv");
    testutil::write_file(nonfinite, "1,inf\n");
    CHECK_THROWS_AS(gfsc::load_csv(nonfinite), gfsc::ParseError);

    const std::string empty = dir.file("empty.csv");
    testutil::write_file(empty, "");
    CHECK_THROWS_AS(gfsc::load_csv(empty), gfsc::ParseError);

    const std::string fractional_label = dir.file("fraclabel.csv");
    testutil::write_file(fractional_label, "1,2,0.5\n");
    CHECK_THROWS_AS(gfsc::load_csv(fractional_label, true), gfsc::ParseError);
}

TEST_CASE("labels file round trip and canonicalization", "[data]") {
    testutil::TempDir dir;
    const std::string path = dir.file("y.labels");
    gfsc::save_labels({3, 3, 7, 1}, path);
    const Labels raw = gfsc::load_labels(path);
    CHECK(raw == Labels{3, 3, 7, 1});
    const auto canon = gfsc::canonicalize_labels(raw);
    CHECK(canon.labels == Labels{0, 0, 1, 2});
    CHECK(canon.groups == 3);

    const std::string bad = dir.file("bad.labels");
    testutil::write_file(bad, "1\nx\n");
    CHECK_THROWS_WITH(gfsc::load_labels(bad), Catch::Matchers::ContainsSubstring("line 2"));
}

TEST_CASE("binary matrix round trip is exact", "[data]") {
    testutil::TempDir dir;
    SeededRng rng(307);
    Matrix x = rng.normal_matrix(6, 9);
    x(0, 0) = -0.0;
    x(5, 8) = 1e-310; // subnormal
    const std::string path = dir.file("x.smcl");
    gfsc::write_smcl(x, path);
    CHECK(gfsc::has_smcl_magic(path));
    const Matrix back = gfsc::read_smcl(path);
    REQUIRE(back.rows() == 6);
    REQUIRE(back.cols() == 9);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 9; ++j)
            CHECK(std::memcmp(&back(i, j), &x(i, j), sizeof(double)) == 0);
}

TEST_CASE("binary reader rejects damage", "[data]") {
    testutil::TempDir dir;
    const std::string bad_magic = dir.file("bad.smcl");
    testutil::write_file(bad_magic, "NOTIT\x01\x02");
    CHECK_THROWS_AS(gfsc::read_smcl(bad_magic), gfsc::ParseError);

    const std::string truncated = dir.file("trunc.smcl");
    SeededRng rng(1);
    const Matrix x = rng.normal_matrix(4, 4);
    gfsc::write_smcl(x, truncated);
    std::string bytes = testutil::read_file(truncated);
    bytes.resize(bytes.size() - 11);
    testutil::write_file(truncated, bytes);
    CHECK_THROWS_AS(gfsc::read_smcl(truncated), gfsc::ParseError);

    CHECK_THROWS_AS(gfsc::read_smcl(dir.file("missing.smcl")), gfsc::IoError);
}

TEST_CASE("load_features sniffs the format", "[data]") {
    testutil::TempDir dir;
    SeededRng rng(311);
    const Matrix x = rng.normal_matrix(5, 3);
    const std::string csv = dir.file("f.csv");
    const std::string bin = dir.file("f.smcl");
    gfsc::save_csv(x, csv);
    gfsc::write_smcl(x, bin);
    CHECK((gfsc::load_features(csv) - x).cwiseAbs().maxCoeff() == 0.0);
    CHECK((gfsc::load_features(bin) - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("subspace generator shapes and determinism", "[data]") {
    gfsc::SubspaceSpec spec;
    spec.ambient_dim = 20;
    spec.subspace_dim = 3;
    spec.clusters = 4;
    spec.samples_per_cluster = 6;
    spec.noise_sigma = 0.05;
    spec.seed = 99;
    const auto a = gfsc::gen_subspaces(spec);
    const auto b = gfsc::gen_subspaces(spec);
    REQUIRE(a.features.rows() == 24);
    REQUIRE(a.features.cols() == 20);
    CHECK((a.features - b.features).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(a.labels.has_value());
    CHECK(a.groups() == 4);
    for (int c = 0; c < 4; ++c)
        for (int s = 0; s < 6; ++s) CHECK((*a.labels)[c * 6 + s] == c);

    spec.seed = 100;
    const auto c = gfsc::gen_subspaces(spec);
    CHECK((a.features - c.features).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("noiseless clusters stay inside their subspaces", "[data]") {
    gfsc::SubspaceSpec spec;
    spec.ambient_dim = 15;
    spec.subspace_dim = 2;
    spec.clusters = 3;
    spec.samples_per_cluster = 8;
    spec.noise_sigma = 0.0;
    spec.seed = 5;
    const auto data = gfsc::gen_subspaces(spec);
    for (int c = 0; c < 3; ++c) {
        const Matrix block = data.features.middleRows(c * 8, 8);
        const Eigen::JacobiSVD<Matrix> svd(block);
        // rank must not exceed the subspace dimension
        CHECK(svd.singularValues()[2] < 1e-10);
    }
}

TEST_CASE("orthogonal bases make cross-cluster samples orthogonal", "[data]") {
    gfsc::SubspaceSpec spec;
    spec.ambient_dim = 12;
    spec.subspace_dim = 2;
    spec.clusters = 3;
    spec.samples_per_cluster = 5;
    spec.noise_sigma = 0.0;
    spec.seed = 17;
    spec.orthogonal_bases = true;
    const auto data = gfsc::gen_subspaces(spec);
    for (int i = 0; i < 5; ++i)
        for (int j = 5; j < 10; ++j)
            CHECK(std::abs(data.features.row(i).dot(data.features.row(j))) < 1e-10);
}

TEST_CASE("subspace generator validates", "[data]") {
    gfsc::SubspaceSpec spec;
    spec.subspace_dim = spec.ambient_dim;
    CHECK_THROWS_AS(gfsc::gen_subspaces(spec), gfsc::ContractViolation);
    spec = {};
    spec.noise_sigma = -1.0;
    CHECK_THROWS_AS(gfsc::gen_subspaces(spec), gfsc::ContractViolation);
    spec = {};
    spec.orthogonal_bases = true;
    spec.ambient_dim = 5;
    spec.clusters = 3;
    spec.subspace_dim = 2;
    CHECK_THROWS_AS(gfsc::gen_subspaces(spec), gfsc::ContractViolation);
}

TEST_CASE("gaussian corruption is seeded and shaped", "[data]") {
    SeededRng rng(313);
    const Matrix x = rng.normal_matrix(40, 25);
    const Matrix a = gfsc::add_gaussian_noise(x, 1.0, 0.05, 77);
    const Matrix b = gfsc::add_gaussian_noise(x, 1.0, 0.05, 77);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    const Matrix c = gfsc::add_gaussian_noise(x, 1.0, 0.05, 78);
    CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);
    // the offset dominates: mean shift close to 1
    CHECK(std::abs((a - x).mean() - 1.0) < 0.01);
    // sigma 0 is the pure offset
    const Matrix d = gfsc::add_gaussian_noise(x, 2.0, 0.0, 1);
    CHECK((d.array() == x.array() + 2.0).all());
}

TEST_CASE("row to image reshaping is row-major", "[data]") {
    Matrix x(1, 6);
    x << 1, 2, 3, 4, 5, 6;
    const auto images = gfsc::as_images(x, 2, 3);
    REQUIRE(images.size() == 1);
    CHECK(images[0](0, 0) == 1.0);
    CHECK(images[0](0, 2) == 3.0);
    CHECK(images[0](1, 0) == 4.0);
    CHECK(images[0](1, 2) == 6.0);
    CHECK_THROWS_AS(gfsc::as_images(x, 2, 2), gfsc::ContractViolation);
}

TEST_CASE("standardization centers and scales", "[data]") {
    SeededRng rng(317);
    Matrix x = rng.normal_matrix(50, 4);
    x.col(1).array() = 7.5; // constant feature
    x.col(2) *= 100.0;
    const Matrix s = gfsc::standardized(x);
    for (int j = 0; j < 4; ++j) CHECK(std::abs(s.col(j).mean()) < 1e-12);
    for (int j : {0, 2, 3})
        CHECK(s.col(j).squaredNorm() / 50.0 == Catch::Approx(1.0).margin(1e-12));
    CHECK(s.col(1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("smooth image fixture shapes, labels and determinism", "[data]") {
    gfsc::SmoothImageSpec spec;
    spec.classes = 4;
    spec.samples_per_class = 5;
    spec.height = 8;
    spec.width = 8;
    spec.seed = 3;
    const auto a = gfsc::gen_smooth_images(spec);
    const auto b = gfsc::gen_smooth_images(spec);
    REQUIRE(a.features.rows() == 20);
    REQUIRE(a.features.cols() == 64);
    CHECK((a.features - b.features).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(a.labels.has_value());
    CHECK(a.groups() == 4);
    CHECK(a.features.allFinite());
    // every component except the baseline sums to zero over the pixels
    for (Eigen::Index r = 0; r < a.features.rows(); ++r)
        CHECK(std::abs(a.features.row(r).mean() - spec.baseline) < 1e-12);
    // within a class, samples vary only in texture amplitude and step height
    const Matrix block = a.features.topRows(5);
    const Matrix spread = block.rowwise() - block.colwise().mean();
    Eigen::JacobiSVD<Matrix> svd(spread);
    REQUIRE(svd.singularValues().size() >= 3);
    CHECK(svd.singularValues()(2) < 1e-9 * svd.singularValues()(0));
}

TEST_CASE("smooth image fixture validates", "[data]") {
    gfsc::SmoothImageSpec spec;
    spec.classes = 1;
    CHECK_THROWS_AS(gfsc::gen_smooth_images(spec), gfsc::ContractViolation);
    spec = {};
    spec.height = 2;
    spec.width = 2;
    spec.classes = 2; // needs three distinct modes, a 2x2 grid only has one
    CHECK_THROWS_AS(gfsc::gen_smooth_images(spec), gfsc::ContractViolation);
    spec = {};
    spec.jitter_scale = -0.5;
    CHECK_THROWS_AS(gfsc::gen_smooth_images(spec), gfsc::ContractViolation);
}
