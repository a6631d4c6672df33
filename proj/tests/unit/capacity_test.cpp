#include "walkcap/capacity/capacity.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace walkcap::capacity;

namespace {

// Independent closed form, accumulated in long double through logarithms so it
// shares no arithmetic path with the chained implementation.
long double closed_form(double area, const CapacityParams& p) {
    long double log_sum = std::log(static_cast<long double>(area)) - std::log((long double)p.area_per_pedestrian) +
                          std::log((long double)p.rotation_factor) + std::log((long double)p.management_capacity);
    for (const auto& f : p.corrective_factors) log_sum += std::log((long double)f.value);
    return std::exp(log_sum);
}

CapacityParams random_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ap(0.25, 20.0), rf(0.1, 24.0), frac(0.01, 1.0);
    std::uniform_int_distribution<int> n(0, 6);
    CapacityParams p;
    p.area_per_pedestrian = ap(rng);
    p.rotation_factor = rf(rng);
    p.management_capacity = frac(rng);
    p.corrective_factors.clear();
    for (int i = n(rng); i > 0; --i) p.corrective_factors.push_back({"f" + std::to_string(i), frac(rng)});
    return p;
}

}  // namespace

TEST_SUITE("capacity formulas") {
    TEST_CASE("rotation factor") {
        CHECK(rotation_factor(10, 4) == 2.5);
        CHECK(rotation_factor(8, 8) == 1.0);
        CHECK_THROWS_AS(rotation_factor(8, 10), ParameterError);
        CHECK_THROWS_AS(rotation_factor(0, 1), ParameterError);
        CHECK_THROWS_AS(rotation_factor(5, -1), ParameterError);
    }

    TEST_CASE("corrective factor") {
        CHECK(corrective_factor(65, 365) == doctest::Approx(0.8219).epsilon(0.0001 / 0.8219));
        CHECK(corrective_factor(75, 365) == doctest::Approx(0.7945).epsilon(0.0001 / 0.7945));
        CHECK(corrective_factor(0, 365) == 1.0);
        CHECK(corrective_factor(365, 365) == 0.0);
        CHECK_THROWS_AS(corrective_factor(400, 365), ParameterError);
        CHECK_THROWS_AS(corrective_factor(-1, 365), ParameterError);
        CHECK_THROWS_AS(corrective_factor(1, 0), ParameterError);
    }

    TEST_CASE("pcc") {
        CapacityParams p;
        CHECK(pcc(1000, p) == 1250.0);
        CHECK(pcc(0, p) == 0.0);
        p.rotation_factor = 1.0;
        CHECK(pcc(1, p) == 0.5);
        CHECK_THROWS_AS(pcc(-1, p), ParameterError);
        p.area_per_pedestrian = 0.0;
        CHECK_THROWS_AS(pcc(1000, p), ParameterError);
    }

    TEST_CASE("rcc") {
        const CapacityParams p;
        CHECK(rcc(1250, p.corrective_factors) == doctest::Approx(816.25).epsilon(0.01 / 816.25));
        CHECK(rcc(1250, {}) == 1250.0);
        CHECK(rcc(1250, {{"closed", 0.0}, {"x", 0.5}}) == 0.0);
        CHECK_THROWS_AS(rcc(1250, {{"bad", 1.2}}), ParameterError);
        CHECK_THROWS_AS(rcc(1250, {{"bad", std::nan("")}}), ParameterError);
    }

    TEST_CASE("ecc") {
        CHECK(ecc(816.25, 0.7775) == doctest::Approx(634.63).epsilon(0.01 / 634.63));
        CHECK(ecc(816.25, 1.0) == 816.25);
        CHECK(ecc(816.25, 0.0) == 0.0);
        try {
            ecc(816.25, 1.5);
            FAIL("expected an error");
        } catch (const ParameterError& e) {
            CHECK(e.field() == "management_capacity");
        }
    }

    TEST_CASE("assess with the default parametrisation") {
        const auto r = assess(1000, CapacityParams{});
        CHECK(r.pcc == 1250.0);
        CHECK(r.rcc == doctest::Approx(816.25).epsilon(0.01 / 816.25));
        CHECK(r.ecc == doctest::Approx(634.63).epsilon(0.01 / 634.63));
        // 0.5 x 2.5 x 0.7945 x 0.8219 x 0.7775 persons per m2
        CHECK(r.ecc / 1000 == doctest::Approx(0.63464).epsilon(0.0001 / 0.63464));
        CHECK(r.params == CapacityParams{});
        CHECK(r.walkable_area_m2 == 1000);
    }

    TEST_CASE("assess edge cases") {
        const auto zero = assess(0, CapacityParams{});
        CHECK(zero.pcc == 0.0);
        CHECK(zero.rcc == 0.0);
        CHECK(zero.ecc == 0.0);
        CapacityParams p;
        p.area_per_pedestrian = 0;
        try {
            assess(1000, p);
            FAIL("expected an error");
        } catch (const ParameterError& e) {
            CHECK(e.field() == "area_per_pedestrian");
        }
    }
}

TEST_SUITE("capacity json") {
    TEST_CASE("report schema") {
        const auto doc = to_json(assess(1000, CapacityParams{}));
        CHECK(doc["pcc"] == 1250.0);
        CHECK(doc["inputs"]["walkable_area_m2"] == 1000.0);
        CHECK(doc["inputs"]["area_per_pedestrian"] == 2.0);
        CHECK(doc["inputs"]["rotation_factor"] == 2.5);
        CHECK(doc["inputs"]["management_capacity"] == 0.7775);
        REQUIRE(doc["inputs"]["corrective_factors"].size() == 2);
        CHECK(doc["inputs"]["corrective_factors"][0]["label"] == "temperature");
        CHECK(doc["inputs"]["corrective_factors"][1]["value"] == 0.8219);
    }

    TEST_CASE("floored presentation") {
        const auto doc = to_json(assess(1000, CapacityParams{}), true);
        CHECK(doc["rcc"] == 816.0);
        CHECK(doc["ecc"] == 634.0);
    }

    TEST_CASE("parameters from a request body") {
        auto p = params_from_json(nlohmann::json::object());
        CHECK(p == CapacityParams{});
        p = params_from_json({{"area_per_pedestrian", 4}, {"corrective_factors", {0.5, {{"label", "rain"}, {"value", 0.25}}}}});
        CHECK(p.area_per_pedestrian == 4.0);
        REQUIRE(p.corrective_factors.size() == 2);
        CHECK(p.corrective_factors[0].label.empty());
        CHECK(p.corrective_factors[1].label == "rain");
        p = params_from_json({{"corrective_factors", nlohmann::json::array()}});
        CHECK(p.corrective_factors.empty());
    }

    TEST_CASE("bad request bodies name the field") {
        auto field_of = [](const nlohmann::json& body) {
            try {
                params_from_json(body);
            } catch (const ParameterError& e) {
                return e.field();
            }
            return std::string();
        };
        CHECK(field_of({{"management_capacity", 1.5}}) == "management_capacity");
        CHECK(field_of({{"rotation_factor", "fast"}}) == "rotation_factor");
        CHECK(field_of({{"area_per_pedestrian", -2}}) == "area_per_pedestrian");
        CHECK(field_of({{"corrective_factors", {1.1}}}) == "corrective_factors");
        CHECK(field_of({{"corrective_factors", {"x"}}}) == "corrective_factors");
        CHECK(field_of(nlohmann::json::array()) == "body");
    }
}

TEST_SUITE("capacity properties") {
    TEST_CASE("ordering, linearity, permutation and composition") {
        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> area_dist(0.0, 2e6);
        for (int i = 0; i < 1000; ++i) {
            const auto p = random_params(rng);
            const double area = area_dist(rng);
            CAPTURE(i);
            const auto r = assess(area, p);

            CHECK(r.ecc >= 0.0);
            CHECK(r.ecc <= r.rcc);
            CHECK(r.rcc <= r.pcc);

            const auto doubled = assess(2 * area, p);
            CHECK(doubled.pcc == doctest::Approx(2 * r.pcc).epsilon(1e-12));
            CHECK(doubled.rcc == doctest::Approx(2 * r.rcc).epsilon(1e-12));
            CHECK(doubled.ecc == doctest::Approx(2 * r.ecc).epsilon(1e-12));

            auto shuffled = p;
            std::shuffle(shuffled.corrective_factors.begin(), shuffled.corrective_factors.end(), rng);
            CHECK(rcc(r.pcc, shuffled.corrective_factors) == doctest::Approx(r.rcc).epsilon(1e-12));

            if (area > 0) {
                const double expected = static_cast<double>(closed_form(area, p));
                CHECK(std::abs(r.ecc - expected) <= 1e-12 * expected);
            }
        }
    }
}
