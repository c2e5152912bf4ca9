#pragma once

// Hand-evaluated fixtures for nms_1d and validate_concentric, shared by the
// unit tests and the acceptance runner.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace fixtures {

struct NmsCase {
    std::string name;
    std::vector<int> v;
    double window_fraction;
    std::vector<int> expected;
};

inline std::vector<int> ring_profile() {
    std::vector<int> v(120, 0);
    for (const int p : {22, 44, 66}) {
        v[p] = 200;
        v[p - 1] = 100;
        v[p + 1] = 100;
    }
    return v;
}

inline std::vector<NmsCase> nms_cases() {
    return {
        {"all zeros", std::vector<int>(10, 0), 0.10, {}},
        {"two peaks len 10", {0, 0, 90, 0, 0, 0, 0, 0, 0, 70}, 0.10, {2, 9}},
        {"two-element plateau", {50, 50}, 0.10, {0}},
        {"shoulders window 1", {0, 40, 60, 40, 0, 0, 45, 0, 0, 0}, 0.10, {2, 6}},
        {"shoulders window 4", {0, 40, 60, 40, 0, 0, 45, 0, 0, 0}, 0.40, {2}},
        {"three-element plateau", {0, 70, 70, 70, 0, 0, 0, 0, 0, 0}, 0.10, {1}},
        {"len 20 window 2", {0, 0, 55, 0, 60, 0, 0, 0, 0, 48, 0, 50, 0, 0, 0, 0, 0, 0, 41, 41}, 0.10, {4, 11, 18}},
        {"window rounds up", {10, 20, 30, 20, 10}, 0.05, {2}},
        {"single element", {5}, 0.10, {0}},
        {"three ring profile", ring_profile(), 0.10, {22, 44, 66}},
    };
}

struct ValidateCase {
    std::string name;
    std::vector<std::vector<int>> maxima;  // 8 rays: Up, Down, Left, Right, UpLeft, UpRight, DownLeft, DownRight
    int min_positive;
    std::optional<int> positive;  // nullopt: rejected
    double r_avg;
};

inline std::array<std::vector<int>, 8> rays(const std::vector<std::vector<int>>& m) {
    std::array<std::vector<int>, 8> out;
    for (std::size_t i = 0; i < out.size() && i < m.size(); ++i) out[i] = m[i];
    return out;
}

inline std::vector<ValidateCase> validate_cases() {
    const std::vector<int> a{15, 30, 45};
    const std::vector<int> none;
    const std::vector<int> d{11, 21, 32};
    return {
        {"exact 1:2:3 on all rays", {a, a, a, a, a, a, a, a}, 5, 8, 15.0},
        {"four rays only", {a, a, a, a, none, none, none, none}, 5, std::nullopt, 0.0},
        {"third ring too far", {a, a, a, a, {15, 30, 80}, a, a, a}, 5, 7, 15.0},
        {"axial and diagonal scales", {{20, 40, 60, 80}, {20, 40, 60, 80}, {20, 40, 60, 80}, {20, 40, 60, 80},
                                       {14, 28, 42}, {14, 28, 42}, {14, 28, 42}, {14, 28, 42}}, 5, 8, 20.0},
        {"exactly five positive", {a, a, a, {15, 30}, d, d, none, none}, 5, 5, 15.0},
        {"five positive, six required", {a, a, a, {15, 30}, d, d, none, none}, 6, std::nullopt, 0.0},
        {"just outside tolerance", {{10, 20, 30}, {10, 20, 30}, {10, 20, 30}, {10, 20, 36},
                                    {7, 14, 21}, {7, 14, 21}, {7, 14, 21}, {7, 14, 21}}, 5, 7, 10.0},
        {"on the tolerance edge", {{10, 20, 30}, {10, 20, 30}, {10, 20, 30}, {10, 20, 35},
                                   {7, 14, 21}, {7, 14, 21}, {7, 14, 21}, {7, 14, 21}}, 5, 8, 10.0},
        {"two maxima per ray", {{15, 30}, {15, 30}, {15, 30}, {15, 30}, {15, 30}, {15, 30}, {15, 30}, {15, 30}}, 5,
         std::nullopt, 0.0},
        {"diagonal rays only", {none, none, none, none, {14, 28, 42}, {14, 28, 42}, {14, 28, 42}, {14, 28, 42}}, 4, 4,
         14.0 * std::sqrt(2.0)},
    };
}

}  // namespace fixtures
