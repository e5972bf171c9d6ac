#include "nwave/verify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>
#include <random>

#include "nwave/flow.hpp"
#include "nwave/hierarchy.hpp"

namespace nwave {

namespace {

std::string lam_str(double x) { return format_double(x); }

// Accumulates max |residual| per case id.
class Collector {
public:
    void add(const std::string& id, const std::string& relation, double residual, double tol,
             const std::string& note = {}) {
        auto [it, fresh] = rows_.try_emplace(id);
        ResidualReport& r = it->second;
        if (fresh) {
            r.case_id = id;
            r.relation = relation;
            r.tolerance = tol;
            r.note = note;
        }
        r.samples += 1;
        r.max_residual = std::max(r.max_residual, std::abs(residual));
        if (!std::isfinite(residual)) r.max_residual = residual;
    }
    std::vector<ResidualReport> finish() {
        std::vector<ResidualReport> out;
        for (auto& [id, r] : rows_) {
            r.pass = std::isfinite(r.max_residual) && r.max_residual <= r.tolerance;
            out.push_back(r);
        }
        return out;  // std::map keeps them sorted by case id
    }

private:
    std::map<std::string, ResidualReport> rows_;
};

double scale_for(const SamplingOptions& o, int i) {
    if (o.scales.empty()) return 1.0;
    return o.scales[static_cast<size_t>(i) % o.scales.size()];
}

std::string params_note(const SystemParams& p) {
    return p.has_distinct_spectra() ? std::string() : std::string("parameters violate distinct spectra of A, D");
}

} // namespace

SystemParams default_params(const Shape& shape) {
    static const double as[] = {0.3, -0.8, 0.65, -0.15, 1.2, -1.45};
    static const double ds[] = {0.5, -0.4, 1.1, -1.25, 0.8, 0.05};
    if (shape.n_plus < 1 || shape.n_minus < 1 || shape.n_plus > 6 || shape.n_minus > 6)
        throw DimensionError("default_params supports shapes up to 6x6");
    SystemParams p;
    p.a.assign(as, as + shape.n_plus);
    p.d.assign(ds, ds + shape.n_minus);
    return p;
}

WaveState random_state(const Shape& shape, double scale, std::uint64_t seed, int index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(shape.n_plus), static_cast<std::uint32_t>(shape.n_minus),
                      static_cast<std::uint32_t>(index)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    WaveState s{ComplexMatrix(shape.n_plus, shape.n_minus)};
    for (Eigen::Index i = 0; i < s.Z.rows(); ++i)
        for (Eigen::Index j = 0; j < s.Z.cols(); ++j) {
            const double rad = std::sqrt(u(rng)), ang = 2 * std::numbers::pi * u(rng);
            s.Z(i, j) = std::polar(scale * rad, ang);
        }
    return s;
}

std::vector<ResidualReport> check_involution(const std::vector<Shape>& shapes, int k_max,
                                             const std::vector<double>& lambdas, const SamplingOptions& opts,
                                             const ParamsFactory& params_for) {
    if (k_max < 1 || opts.samples < 1) throw ValidationError("check_involution: k_max and samples must be >= 1");
    Collector col;
    for (const Shape& shape : shapes) {
        const SystemParams base = params_for ? params_for(shape) : default_params(shape);
        const std::string note = params_note(base);
        // functionals indexed by (k, lambda)
        struct Item {
            int k;
            double lam;
            Functional f;
        };
        std::vector<Item> items;
        for (int k = 1; k <= k_max; ++k)
            for (double lam : lambdas) {
                SystemParams p = base;
                p.k = k;
                p.lambda = lam;
                items.push_back({k, lam, functional_h(p)});
            }
        for (int s = 0; s < opts.samples; ++s) {
            const WaveState st = random_state(shape, scale_for(opts, s), opts.seed, s);
            std::vector<WirtingerGradient> g;
            for (const auto& it : items) g.push_back(wirtinger_gradient_fd(it.f, st, opts.fd_step));
            for (size_t i = 0; i < items.size(); ++i)
                for (size_t j = 0; j < items.size(); ++j) {
                    const auto &A = items[i], &B = items[j];
                    if (A.k > B.k || (A.k == B.k && i > j)) continue;
                    const std::string id = "involution/" + shape.label() + "/H" + std::to_string(A.k) + "(" +
                                           lam_str(A.lam) + "),H" + std::to_string(B.k) + "(" + lam_str(B.lam) + ")";
                    col.add(id, "{H_k,lam, H_n,lam'}", poisson_bracket(g[i], g[j]), opts.tolerance, note);
                }
        }
    }
    return col.finish();
}

std::vector<ResidualReport> check_manley_rowe(const std::vector<Shape>& shapes, int k_max, int m_max,
                                              const std::vector<double>& lambdas, const SamplingOptions& opts,
                                              const ParamsFactory& params_for) {
    if (k_max < 0 || opts.samples < 1) throw ValidationError("check_manley_rowe: bad grid");
    Collector col;
    for (const Shape& shape : shapes) {
        const SystemParams base = params_for ? params_for(shape) : default_params(shape);
        const std::string note = params_note(base);
        struct Item {
            std::string name;
            int kind;  // 0 alpha, 1 delta, 2 hamiltonian
            Functional f;
        };
        std::vector<Item> items;
        for (int k = 0; k <= k_max; ++k) items.push_back({"alpha" + std::to_string(k), 0, functional_alpha(base, k)});
        for (int k = 0; k <= k_max; ++k) items.push_back({"delta" + std::to_string(k), 1, functional_delta(base, k)});
        for (int m = 1; m <= m_max; ++m)
            for (double lam : lambdas) {
                SystemParams p = base;
                p.k = m;
                p.lambda = lam;
                items.push_back({"H" + std::to_string(m) + "(" + lam_str(lam) + ")", 2, functional_h(p)});
            }
        for (int s = 0; s < opts.samples; ++s) {
            const WaveState st = random_state(shape, scale_for(opts, s), opts.seed, s);
            std::vector<WirtingerGradient> g;
            for (const auto& it : items) g.push_back(wirtinger_gradient_fd(it.f, st, opts.fd_step));
            for (size_t i = 0; i < items.size(); ++i) {
                if (items[i].kind == 2) continue;
                for (size_t j = i + 1; j < items.size(); ++j) {
                    const std::string id =
                        "manley_rowe/" + shape.label() + "/" + items[i].name + "," + items[j].name;
                    const char* rel = items[j].kind == 2 ? "{MR_k, H_m,lam}" : "{MR_k, MR_l}";
                    col.add(id, rel, poisson_bracket(g[i], g[j]), opts.tolerance, note);
                }
            }
        }
    }
    return col.finish();
}

std::vector<ResidualReport> check_poisson_map(const SamplingOptions& opts) {
    // The 12 coordinate functions, evaluated from column k of a 2x3 Z.
    enum Kind { S, R, X, Y };  // s_k, r_k, Re eta_k, Im eta_k
    struct Coord {
        Kind kind;
        int k;
        std::string name;
    };
    std::vector<Coord> coords;
    const char* kn[] = {"s", "r", "Re_eta", "Im_eta"};
    for (int k = 0; k < 3; ++k)
        for (int kind = 0; kind < 4; ++kind)
            coords.push_back({static_cast<Kind>(kind), k, std::string(kn[kind]) + std::to_string(k + 1)});

    auto functional = [](Kind kind, int k) -> Functional {
        return [kind, k](const ExtMatrix& Z) -> long double {
            const ExtComplex z = Z(0, k), v = Z(1, k);
            const ExtComplex eta = std::conj(v) * z;
            switch (kind) {
            case S: return std::norm(z) + std::norm(v);
            case R: return std::norm(z) - std::norm(v);
            case X: return eta.real();
            case Y: return eta.imag();
            }
            return 0.0L;
        };
    };
    // Expected values. With the Z bracket fixed by df = Tr(df/dZ dZ) + ...,
    // the pull-back satisfies {eta, conj eta} = -i r, {r, eta} = -2i eta,
    // i.e. the u(2)* Lie-Poisson relations up to an overall sign.
    auto expected = [](const Coord& a, const Coord& b, double r, double x, double y) {
        if (a.k != b.k) return 0.0;
        auto ordered = [&](Kind p, Kind q) -> double {
            if (p == X && q == Y) return 0.5 * r;
            if (p == R && q == X) return 2 * y;
            if (p == R && q == Y) return -2 * x;
            return 0.0;
        };
        return ordered(a.kind, b.kind) - ordered(b.kind, a.kind);
    };

    Collector col;
    const Shape shape{2, 3};
    std::vector<Functional> fs;
    for (const auto& c : coords) fs.push_back(functional(c.kind, c.k));
    std::vector<Functional> cas;
    for (int k = 0; k < 3; ++k)
        cas.push_back([k](const ExtMatrix& Z) -> long double {
            const ExtComplex z = Z(0, k), v = Z(1, k);
            const long double r = std::norm(z) - std::norm(v);
            return 0.5L * r * r + 2.0L * std::norm(std::conj(v) * z);
        });

    for (int s = 0; s < opts.samples; ++s) {
        const WaveState st = random_state(shape, scale_for(opts, s), opts.seed, s);
        std::vector<WirtingerGradient> g;
        for (const auto& f : fs) g.push_back(wirtinger_gradient_fd(f, st, opts.fd_step));
        for (size_t i = 0; i < coords.size(); ++i)
            for (size_t j = i + 1; j < coords.size(); ++j) {
                const int k = coords[i].k;
                const Complex z = st.Z(0, k), v = st.Z(1, k);
                const Complex eta = std::conj(v) * z;
                const double r = std::norm(z) - std::norm(v);
                const double want = expected(coords[i], coords[j], r, eta.real(), eta.imag());
                const double got = poisson_bracket(g[i], g[j]);
                const bool central = coords[i].kind == S || coords[j].kind == S;
                const bool cross = coords[i].k != coords[j].k;
                const char* rel = central ? "s_k central" : cross ? "cross-sphere zero" : "u(2)* bracket";
                col.add("poisson_map/{" + coords[i].name + "," + coords[j].name + "}", rel, got - want,
                        central || cross ? std::min(opts.tolerance, 1e-8) : opts.tolerance);
            }
        for (int k = 0; k < 3; ++k) {
            const WirtingerGradient gc = wirtinger_gradient_fd(cas[static_cast<size_t>(k)], st, opts.fd_step);
            double worst = 0;
            for (size_t i = 0; i < coords.size(); ++i) worst = std::max(worst, std::abs(poisson_bracket(gc, g[i])));
            col.add("poisson_map/casimir_c" + std::to_string(k + 1), "c_k central", worst, opts.tolerance);
        }
    }
    return col.finish();
}

std::vector<ResidualReport> check_gradients(int k_max, const std::vector<double>& lambdas,
                                            const SamplingOptions& opts) {
    Collector col;
    const Shape shape{2, 3};
    const SystemParams base = default_params(shape);
    struct Item {
        std::string name;
        Functional f;
        std::function<ComplexMatrix(const WaveState&)> grad;
    };
    std::vector<Item> items;
    for (int k = 1; k <= k_max; ++k)
        for (double lam : lambdas) {
            SystemParams p = base;
            p.k = k;
            p.lambda = lam;
            items.push_back({"H" + std::to_string(k) + "(" + lam_str(lam) + ")", functional_h(p),
                             [p](const WaveState& s) { return grad_h_k_lambda(p, s); }});
        }
    items.push_back({"quartic_H", functional_quartic(base), [base](const WaveState& s) { return grad_quartic(base, s); }});
    items.push_back({"quintic_F", functional_quintic(base), [base](const WaveState& s) { return grad_quintic(base, s); }});
    for (int k = 0; k <= 3; ++k) {
        items.push_back({"alpha" + std::to_string(k), functional_alpha(base, k),
                         [base, k](const WaveState& s) { return grad_alpha(base, s, k); }});
        items.push_back({"delta" + std::to_string(k), functional_delta(base, k),
                         [base, k](const WaveState& s) { return grad_delta(base, s, k); }});
    }
    for (int s = 0; s < opts.samples; ++s) {
        const WaveState st = random_state(shape, scale_for(opts, s), opts.seed, s);
        for (const auto& it : items) {
            const WirtingerGradient g = wirtinger_gradient_fd(it.f, st, opts.fd_step);
            const double res = (it.grad(st) - g.dZplus).cwiseAbs().maxCoeff();
            col.add("gradient/" + it.name, "analytic dF/dZ+ vs oracle", res, opts.tolerance);
        }
    }
    return col.finish();
}

bool all_pass(const std::vector<ResidualReport>& reports) {
    return std::all_of(reports.begin(), reports.end(), [](const ResidualReport& r) { return r.pass; });
}

void write_residuals_csv(std::ostream& os, const std::vector<ResidualReport>& reports) {
    os << "case_id,relation,samples,max_residual,tolerance,pass,note\n";
    for (const auto& r : reports)
        os << '"' << r.case_id << "\",\"" << r.relation << "\"," << r.samples << ',' << format_double(r.max_residual)
           << ',' << format_double(r.tolerance) << ',' << (r.pass ? "true" : "false") << ",\"" << r.note << "\"\n";
}

void write_residuals_text(std::ostream& os, const std::vector<ResidualReport>& reports) {
    std::size_t failed = 0;
    for (const auto& r : reports) {
        os << (r.pass ? "ok   " : "FAIL ") << r.case_id << "  max=" << format_double(r.max_residual)
           << "  tol=" << format_double(r.tolerance) << "  n=" << r.samples;
        if (!r.note.empty()) os << "  [" << r.note << "]";
        os << '\n';
        if (!r.pass) ++failed;
    }
    os << reports.size() << " cases, " << failed << " failed\n";
}

} // namespace nwave
