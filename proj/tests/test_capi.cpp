#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <vector>

#include "nwave/nwave.h"

TEST_CASE("params and state handles") {
    const double a[] = {0.3, -0.8}, d[] = {0.5, -0.4, 1.1};
    nwave_params* p = nullptr;
    REQUIRE(nwave_params_create(a, 2, d, 3, 0.0, 2, &p) == NWAVE_OK);

    std::vector<double> z(12, 0.0);
    z[0] = 1.0;
    nwave_state* s = nullptr;
    CHECK(nwave_state_create(p, z.data(), 11, &s) == NWAVE_ERR_DIMENSION);
    CHECK(std::strlen(nwave_last_error()) > 0);
    REQUIRE(nwave_state_create(p, z.data(), 12, &s) == NWAVE_OK);
    CHECK(std::strlen(nwave_last_error()) == 0);
    CHECK(nwave_state_length(s) == 12);

    double h = 0;
    REQUIRE(nwave_hamiltonian(p, s, &h) == NWAVE_OK);
    // Tr(mu^2) = sum a^2 + sum d^2 + 2 |Z|^2
    CHECK(h == doctest::Approx(0.09 + 0.64 + 0.25 + 0.16 + 1.21 + 2.0));

    double H = 0, F = 0, al = 0, de = 0;
    REQUIRE(nwave_quartic_quintic(p, s, &H, &F) == NWAVE_OK);
    CHECK(H == doctest::Approx(0.5 + 0.3 * 0.5));
    REQUIRE(nwave_manley_rowe(p, s, 1, &al, &de) == NWAVE_OK);
    CHECK(al == doctest::Approx(0.3));
    CHECK(de == doctest::Approx(0.5));
    CHECK(nwave_manley_rowe(p, s, -1, &al, &de) == NWAVE_ERR_INVALID_ARGUMENT);

    std::vector<double> g(12);
    REQUIRE(nwave_gradient(p, s, NWAVE_FLOW_HIERARCHY, g.data(), g.size()) == NWAVE_OK);
    CHECK(g[0] == doctest::Approx(2.0));  // k = 2: gradient 2Z

    nwave_state_destroy(s);
    nwave_params_destroy(p);
}

TEST_CASE("invalid arguments are rejected, not crashed on") {
    nwave_params* p = nullptr;
    const double a[] = {1.0};
    CHECK(nwave_params_create(a, 1, a, 1, 0.0, 0, &p) == NWAVE_ERR_VALIDATION);
    CHECK(p == nullptr);
    CHECK(nwave_params_create(nullptr, 1, a, 1, 0.0, 1, &p) == NWAVE_ERR_INVALID_ARGUMENT);
    CHECK(nwave_hamiltonian(nullptr, nullptr, nullptr) == NWAVE_ERR_INVALID_ARGUMENT);
    CHECK(std::strcmp(nwave_status_string(NWAVE_ERR_BRANCH_POINT), "branch_point") == 0);
    nwave_trajectory_destroy(nullptr);
    nwave_state_destroy(nullptr);
    nwave_params_destroy(nullptr);
}

TEST_CASE("integration through the C API") {
    const double a[] = {0.3, -0.8}, d[] = {0.5, -0.4, 1.1};
    nwave_params* p = nullptr;
    REQUIRE(nwave_params_create(a, 2, d, 3, 0.0, 1, &p) == NWAVE_OK);
    nwave_state* s = nullptr;
    REQUIRE(nwave_state_random(p, 1.0, 7, 0, &s) == NWAVE_OK);
    nwave_trajectory* t = nullptr;
    REQUIRE(nwave_integrate(p, s, NWAVE_FLOW_QUARTIC, 0.0, 5.0, 51, 1e-10, 1e-12, &t) == NWAVE_OK);
    CHECK(nwave_trajectory_samples(t) == 51);
    CHECK(nwave_trajectory_dimension(t) == 12);
    REQUIRE(nwave_trajectory_invariant_count(t) == 10);
    for (size_t j = 0; j < 10; ++j) {
        double dr = 1;
        REQUIRE(nwave_trajectory_drift(t, j, &dr) == NWAVE_OK);
        CHECK(dr <= 1e-7);
    }
    double tt = 0;
    CHECK(nwave_trajectory_time(t, 50, &tt) == NWAVE_OK);
    CHECK(tt == doctest::Approx(5.0));
    CHECK(nwave_trajectory_time(t, 51, &tt) == NWAVE_ERR_INVALID_ARGUMENT);
    std::vector<double> y(12);
    CHECK(nwave_trajectory_state(t, 0, y.data(), 12) == NWAVE_OK);
    std::vector<double> z0(12);
    nwave_state_get(s, z0.data(), 12);
    CHECK(y == z0);
    const auto csv = std::filesystem::temp_directory_path() / "nwave_capi_traj.csv";
    CHECK(nwave_trajectory_write_csv(t, csv.c_str()) == NWAVE_OK);
    CHECK(std::filesystem::file_size(csv) > 0);
    CHECK(nwave_trajectory_write_csv(t, "/nonexistent/dir/x.csv") == NWAVE_ERR_IO);
    nwave_trajectory_destroy(t);
    nwave_state_destroy(s);
    nwave_params_destroy(p);
}

TEST_CASE("reductions through the C API") {
    const double a[] = {0.3, -0.8}, d2[] = {0.5, -0.4}, d3[] = {0.5, -0.4, 1.1};
    double period = 0;
    nwave_trajectory* t = nullptr;
    REQUIRE(nwave_solve22(a, d2, 1.0, 1.3, 0.2, 0.1, 0.7, 0.0, 10.0, 101, &period, &t) == NWAVE_OK);
    CHECK(period > 0);
    CHECK(nwave_trajectory_dimension(t) == 2);
    nwave_trajectory_destroy(t);
    CHECK(nwave_solve22(a, d2, 1.0, 1.3, 5.0, 0.1, 0.7, 0.0, 10.0, 101, &period, &t) == NWAVE_ERR_VALIDATION);

    const double s[] = {1.0, 1.3, 0.9}, y[] = {0.1, -0.2, 0.7, -0.4};
    double gamma = 0, tau = 0;
    REQUIRE(nwave_angle_action(a, d3, s, 0.2, y, nullptr, &gamma, &tau) == NWAVE_OK);
    CHECK(std::isfinite(gamma));
    CHECK(std::isfinite(tau));
}

TEST_CASE("scenario runner") {
    int code = -1;
    CHECK(nwave_run_scenario_file("/nonexistent.json", nullptr, nullptr, 1, &code) == NWAVE_OK);
    CHECK(code == 2);
}
