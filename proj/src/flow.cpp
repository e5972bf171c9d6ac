#include "nwave/flow.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

namespace nwave {

namespace {

// Dormand & Prince DOP853 tableau, dense output coefficients included
// (Hairer, Norsett & Wanner).
constexpr double c2 = 0.526001519587677318785587544488e-01;
constexpr double c3 = 0.789002279381515978178381316732e-01;
constexpr double c4 = 0.118350341907227396726757197510e+00;
constexpr double c5 = 0.281649658092772603273242802490e+00;
constexpr double c6 = 0.333333333333333333333333333333e+00;
constexpr double c7 = 0.25e+00;
constexpr double c8 = 0.307692307692307692307692307692e+00;
constexpr double c9 = 0.651282051282051282051282051282e+00;
constexpr double c10 = 0.6e+00;
constexpr double c11 = 0.857142857142857142857142857142e+00;
constexpr double c14 = 0.1e+00;
constexpr double c15 = 0.2e+00;
constexpr double c16 = 0.777777777777777777777777777778e+00;

constexpr double a21 = 5.26001519587677318785587544488e-2;
constexpr double a31 = 1.97250569845378994544595329183e-2;
constexpr double a32 = 5.91751709536136983633785987549e-2;
constexpr double a41 = 2.95875854768068491816892993775e-2;
constexpr double a43 = 8.87627564304205475450678981324e-2;
constexpr double a51 = 2.41365134159266685502369798665e-1;
constexpr double a53 = -8.84549479328286085344864962717e-1;
constexpr double a54 = 9.24834003261792003115737966543e-1;
constexpr double a61 = 3.7037037037037037037037037037e-2;
constexpr double a64 = 1.70828608729473871279604482173e-1;
constexpr double a65 = 1.25467687566822425016691814123e-1;
constexpr double a71 = 3.7109375e-2;
constexpr double a74 = 1.70252211019544039314978060272e-1;
constexpr double a75 = 6.02165389804559606850219397283e-2;
constexpr double a76 = -1.7578125e-2;
constexpr double a81 = 3.70920001185047927108779319836e-2;
constexpr double a84 = 1.70383925712239993810214054705e-1;
constexpr double a85 = 1.07262030446373284651809199168e-1;
constexpr double a86 = -1.53194377486244017527936158236e-2;
constexpr double a87 = 8.27378916381402288758473766002e-3;
constexpr double a91 = 6.24110958716075717114429577812e-1;
constexpr double a94 = -3.36089262944694129406857109825e0;
constexpr double a95 = -8.68219346841726006818189891453e-1;
constexpr double a96 = 2.75920996994467083049415600797e1;
constexpr double a97 = 2.01540675504778934086186788979e1;
constexpr double a98 = -4.34898841810699588477366255144e1;
constexpr double a101 = 4.77662536438264365890433908527e-1;
constexpr double a104 = -2.48811461997166764192642586468e0;
constexpr double a105 = -5.90290826836842996371446475743e-1;
constexpr double a106 = 2.12300514481811942347288949897e1;
constexpr double a107 = 1.52792336328824235832596922938e1;
constexpr double a108 = -3.32882109689848629194453265587e1;
constexpr double a109 = -2.03312017085086261358222928593e-2;
constexpr double a111 = -9.3714243008598732571704021658e-1;
constexpr double a114 = 5.18637242884406370830023853209e0;
constexpr double a115 = 1.09143734899672957818500254654e0;
constexpr double a116 = -8.14978701074692612513997267357e0;
constexpr double a117 = -1.85200656599969598641566180701e1;
constexpr double a118 = 2.27394870993505042818970056734e1;
constexpr double a119 = 2.49360555267965238987089396762e0;
constexpr double a1110 = -3.0467644718982195003823669022e0;
constexpr double a121 = 2.27331014751653820792359768449e0;
constexpr double a124 = -1.05344954667372501984066689879e1;
constexpr double a125 = -2.00087205822486249909675718444e0;
constexpr double a126 = -1.79589318631187989172765950534e1;
constexpr double a127 = 2.79488845294199600508499808837e1;
constexpr double a128 = -2.85899827713502369474065508674e0;
constexpr double a129 = -8.87285693353062954433549289258e0;
constexpr double a1210 = 1.23605671757943030647266201528e1;
constexpr double a1211 = 6.43392746015763530355970484046e-1;
constexpr double a141 = 5.61675022830479523392909219681e-2;
constexpr double a147 = 2.53500210216624811088794765333e-1;
constexpr double a148 = -2.46239037470802489917441475441e-1;
constexpr double a149 = -1.24191423263816360469010140626e-1;
constexpr double a1410 = 1.5329179827876569731206322685e-1;
constexpr double a1411 = 8.20105229563468988491666602057e-3;
constexpr double a1412 = 7.56789766054569976138603589584e-3;
constexpr double a1413 = -8.298e-3;
constexpr double a151 = 3.18346481635021405060768473261e-2;
constexpr double a156 = 2.83009096723667755288322961402e-2;
constexpr double a157 = 5.35419883074385676223797384372e-2;
constexpr double a158 = -5.49237485713909884646569340306e-2;
constexpr double a1511 = -1.08347328697249322858509316994e-4;
constexpr double a1512 = 3.82571090835658412954920192323e-4;
constexpr double a1513 = -3.40465008687404560802977114492e-4;
constexpr double a1514 = 1.41312443674632500278074618366e-1;
constexpr double a161 = -4.28896301583791923408573538692e-1;
constexpr double a166 = -4.69762141536116384314449447206e0;
constexpr double a167 = 7.68342119606259904184240953878e0;
constexpr double a168 = 4.06898981839711007970213554331e0;
constexpr double a169 = 3.56727187455281109270669543021e-1;
constexpr double a1613 = -1.39902416515901462129418009734e-3;
constexpr double a1614 = 2.9475147891527723389556272149e0;
constexpr double a1615 = -9.15095847217987001081870187138e0;

constexpr double b1 = 5.42937341165687622380535766363e-2;
constexpr double b6 = 4.45031289275240888144113950566e0;
constexpr double b7 = 1.89151789931450038304281599044e0;
constexpr double b8 = -5.8012039600105847814672114227e0;
constexpr double b9 = 3.1116436695781989440891606237e-1;
constexpr double b10 = -1.52160949662516078556178806805e-1;
constexpr double b11 = 2.01365400804030348374776537501e-1;
constexpr double b12 = 4.47106157277725905176885569043e-2;

constexpr double bhh1 = 0.244094488188976377952755905512e+00;
constexpr double bhh2 = 0.733846688281611857341361741547e+00;
constexpr double bhh3 = 0.220588235294117647058823529412e-01;

constexpr double er1 = 0.1312004499419488073250102996e-01;
constexpr double er6 = -0.1225156446376204440720569753e+01;
constexpr double er7 = -0.4957589496572501915214079952e+00;
constexpr double er8 = 0.1664377182454986536961530415e+01;
constexpr double er9 = -0.3503288487499736816886487290e+00;
constexpr double er10 = 0.3341791187130174790297318841e+00;
constexpr double er11 = 0.8192320648511571246570742613e-01;
constexpr double er12 = -0.2235530786388629525884427845e-01;

constexpr double d41 = -0.84289382761090128651353491142e+01;
constexpr double d46 = 0.56671495351937776962531783590e+00;
constexpr double d47 = -0.30689499459498916912797304727e+01;
constexpr double d48 = 0.23846676565120698287728149680e+01;
constexpr double d49 = 0.21170345824450282767155149946e+01;
constexpr double d410 = -0.87139158377797299206789907490e+00;
constexpr double d411 = 0.22404374302607882758541771650e+01;
constexpr double d412 = 0.63157877876946881815570249290e+00;
constexpr double d413 = -0.88990336451333310820698117400e-01;
constexpr double d414 = 0.18148505520854727256656404962e+02;
constexpr double d415 = -0.91946323924783554000451984436e+01;
constexpr double d416 = -0.44360363875948939664310572000e+01;
constexpr double d51 = 0.10427508642579134603413151009e+02;
constexpr double d56 = 0.24228349177525818288430175319e+03;
constexpr double d57 = 0.16520045171727028198505394887e+03;
constexpr double d58 = -0.37454675472269020279518312152e+03;
constexpr double d59 = -0.22113666853125306036270938578e+02;
constexpr double d510 = 0.77334326684722638389603898808e+01;
constexpr double d511 = -0.30674084731089398182061213626e+02;
constexpr double d512 = -0.93321305264302278729567221706e+01;
constexpr double d513 = 0.15697238121770843886131091075e+02;
constexpr double d514 = -0.31139403219565177677282850411e+02;
constexpr double d515 = -0.93529243588444783865713862664e+01;
constexpr double d516 = 0.35816841486394083752465898540e+02;
constexpr double d61 = 0.19985053242002433820987653617e+02;
constexpr double d66 = -0.38703730874935176555105901742e+03;
constexpr double d67 = -0.18917813819516756882830838328e+03;
constexpr double d68 = 0.52780815920542364900561016686e+03;
constexpr double d69 = -0.11573902539959630126141871134e+02;
constexpr double d610 = 0.68812326946963000169666922661e+01;
constexpr double d611 = -0.10006050966910838403183860980e+01;
constexpr double d612 = 0.77771377980534432092869265740e+00;
constexpr double d613 = -0.27782057523535084065932004339e+01;
constexpr double d614 = -0.60196695231264120758267380846e+02;
constexpr double d615 = 0.84320405506677161018159903784e+02;
constexpr double d616 = 0.11992291136182789328035130030e+02;
constexpr double d71 = -0.25693933462703749003312586129e+02;
constexpr double d76 = -0.15418974869023643374053993627e+03;
constexpr double d77 = -0.23152937917604549567536039109e+03;
constexpr double d78 = 0.35763911791061412378285349910e+03;
constexpr double d79 = 0.93405324183624310003907691704e+02;
constexpr double d710 = -0.37458323136451633156875139351e+02;
constexpr double d711 = 0.10409964950896230045147246184e+03;
constexpr double d712 = 0.29840293426660503123344363579e+02;
constexpr double d713 = -0.43533456590011143754432175058e+02;
constexpr double d714 = 0.96324553959188282948394950600e+02;
constexpr double d715 = -0.39177261675615439165231486172e+02;
constexpr double d716 = -0.14972683625798562581422125276e+03;

constexpr double uround = 2.3e-16;
constexpr double safe = 0.9;
constexpr double fac1 = 0.333;
constexpr double fac2 = 6.0;
constexpr double expo = 1.0 / 8.0;

} // namespace

void DenseSolution::evaluate(double t, std::span<double> y) const {
    if (y.size() != n_) throw DimensionError("DenseSolution::evaluate: wrong output size");
    const double lo = std::min(t_begin_, t_end_), hi = std::max(t_begin_, t_end_);
    const double slack = 1e-12 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
    if (t < lo - slack || t > hi + slack)
        throw DomainError("dense output requested at t=" + format_double(t) + " outside [" + format_double(lo) +
                          ", " + format_double(hi) + "]");
    if (segs_.empty()) throw DomainError("dense output is empty");
    // Segments are ordered along the direction of integration.
    const bool forward = t_end_ >= t_begin_;
    auto it = std::partition_point(segs_.begin(), segs_.end(), [&](const Segment& s) {
        const double end = s.t0 + s.h;
        return forward ? end < t : end > t;
    });
    if (it == segs_.end()) --it;
    const Segment& s = *it;
    const double th = (t - s.t0) / s.h, th1 = 1.0 - th;
    const double* r = s.r.data();
    for (std::size_t i = 0; i < n_; ++i) {
        const double conpar = r[4 * n_ + i] + th * (r[5 * n_ + i] + th1 * (r[6 * n_ + i] + th * r[7 * n_ + i]));
        y[i] = r[i] + th * (r[n_ + i] + th1 * (r[2 * n_ + i] + th * (r[3 * n_ + i] + th1 * conpar)));
    }
}

std::vector<double> DenseSolution::operator()(double t) const {
    std::vector<double> y(n_);
    evaluate(t, y);
    return y;
}

DenseSolution solve_dense(const VectorField& field, std::vector<double> y, double t0, double t1,
                          const IntegratorOptions& opts) {
    if (!(opts.rel_tol > 0) || !(opts.abs_tol > 0)) throw ValidationError("integrator tolerances must be positive");
    if (!std::isfinite(t0) || !std::isfinite(t1)) throw ValidationError("integration span is not finite");
    for (double v : y)
        if (!std::isfinite(v)) throw ValidationError("initial state is not finite");

    const std::size_t n = y.size();
    DenseSolution sol;
    sol.n_ = n;
    sol.t_begin_ = t0;
    sol.t_end_ = t1;
    if (n == 0) throw DimensionError("empty state vector");

    const double posneg = t1 >= t0 ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);
    const double hmax = opts.h_max > 0 ? opts.h_max : std::max(span, 1e-300);
    const double rtol = opts.rel_tol, atol = opts.abs_tol;

    std::vector<std::vector<double>> K(17, std::vector<double>(n));
    std::vector<double> yt(n), y1(n);
    double t = t0;

    auto eval = [&](double tt, const std::vector<double>& yy, std::vector<double>& out) {
        field(tt, yy, out);
        ++sol.evaluations_;
        for (std::size_t i = 0; i < n; ++i)
            if (!std::isfinite(out[i]))
                throw NumericalError("non-finite derivative at t=" + format_double(tt), yy);
    };

    if (span == 0.0) {
        // Degenerate span: a single constant segment.
        DenseSolution::Segment s{t0, 1.0, std::vector<double>(8 * n, 0.0)};
        std::copy(y.begin(), y.end(), s.r.begin());
        sol.segs_.push_back(std::move(s));
        return sol;
    }

    eval(t, y, K[1]);

    // Initial step (Hairer's hinit).
    double h = opts.h_init;
    if (!(h > 0)) {
        double dnf = 0, dny = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sk = atol + rtol * std::abs(y[i]);
            dnf += (K[1][i] / sk) * (K[1][i] / sk);
            dny += (y[i] / sk) * (y[i] / sk);
        }
        h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
        h = std::min(h, hmax);
        for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + posneg * h * K[1][i];
        eval(t + posneg * h, yt, K[2]);
        double der2 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sk = atol + rtol * std::abs(y[i]);
            der2 += ((K[2][i] - K[1][i]) / sk) * ((K[2][i] - K[1][i]) / sk);
        }
        der2 = std::sqrt(der2) / h;
        const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
        const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 1.0 / 8.0);
        h = std::min({100 * h, h1, hmax});
    }
    h = std::min(h, span) * posneg;

    bool last = false, reject = false;
    long steps = 0;

    while (true) {
        if (++steps > opts.max_steps)
            throw NumericalError("maximum step count exceeded at t=" + format_double(t), y);
        if (0.1 * std::abs(h) <= std::abs(t) * uround || std::abs(h) < 1e-300)
            throw StepUnderflowError("step size underflow at t=" + format_double(t), t, y);
        if ((t + 1.01 * h - t1) * posneg > 0.0) {
            h = t1 - t;
            last = true;
        }

        auto stage = [&](int out, double c, std::initializer_list<std::pair<int, double>> terms) {
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0;
                for (auto [j, a] : terms) acc += a * K[static_cast<size_t>(j)][i];
                yt[i] = y[i] + h * acc;
            }
            eval(t + c * h, yt, K[static_cast<size_t>(out)]);
        };
        stage(2, c2, {{1, a21}});
        stage(3, c3, {{1, a31}, {2, a32}});
        stage(4, c4, {{1, a41}, {3, a43}});
        stage(5, c5, {{1, a51}, {3, a53}, {4, a54}});
        stage(6, c6, {{1, a61}, {4, a64}, {5, a65}});
        stage(7, c7, {{1, a71}, {4, a74}, {5, a75}, {6, a76}});
        stage(8, c8, {{1, a81}, {4, a84}, {5, a85}, {6, a86}, {7, a87}});
        stage(9, c9, {{1, a91}, {4, a94}, {5, a95}, {6, a96}, {7, a97}, {8, a98}});
        stage(10, c10, {{1, a101}, {4, a104}, {5, a105}, {6, a106}, {7, a107}, {8, a108}, {9, a109}});
        stage(11, c11,
              {{1, a111}, {4, a114}, {5, a115}, {6, a116}, {7, a117}, {8, a118}, {9, a119}, {10, a1110}});
        stage(12, 1.0,
              {{1, a121}, {4, a124}, {5, a125}, {6, a126}, {7, a127}, {8, a128}, {9, a129}, {10, a1210},
               {11, a1211}});

        double err = 0, err2 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double bsum = b1 * K[1][i] + b6 * K[6][i] + b7 * K[7][i] + b8 * K[8][i] + b9 * K[9][i] +
                                b10 * K[10][i] + b11 * K[11][i] + b12 * K[12][i];
            y1[i] = y[i] + h * bsum;
            const double sk = atol + rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
            const double e3 = bsum - bhh1 * K[1][i] - bhh2 * K[9][i] - bhh3 * K[12][i];
            const double e5 = er1 * K[1][i] + er6 * K[6][i] + er7 * K[7][i] + er8 * K[8][i] + er9 * K[9][i] +
                              er10 * K[10][i] + er11 * K[11][i] + er12 * K[12][i];
            err2 += (e3 / sk) * (e3 / sk);
            err += (e5 / sk) * (e5 / sk);
        }
        double deno = err + 0.01 * err2;
        if (deno <= 0.0) deno = 1.0;
        err = std::abs(h) * err * std::sqrt(1.0 / (static_cast<double>(n) * deno));

        const double fac11 = std::pow(err, expo);
        double fac = std::max(1.0 / fac2, std::min(1.0 / fac1, fac11 / safe));
        double hnew = h / fac;

        if (err <= 1.0) {
            ++sol.accepted_;
            eval(t + h, y1, K[13]);

            DenseSolution::Segment seg{t, h, std::vector<double>(8 * n)};
            double* r = seg.r.data();
            for (std::size_t i = 0; i < n; ++i) {
                const double ydiff = y1[i] - y[i];
                const double bspl = h * K[1][i] - ydiff;
                r[i] = y[i];
                r[n + i] = ydiff;
                r[2 * n + i] = bspl;
                r[3 * n + i] = ydiff - h * K[13][i] - bspl;
                r[4 * n + i] = d41 * K[1][i] + d46 * K[6][i] + d47 * K[7][i] + d48 * K[8][i] + d49 * K[9][i] +
                               d410 * K[10][i] + d411 * K[11][i] + d412 * K[12][i];
                r[5 * n + i] = d51 * K[1][i] + d56 * K[6][i] + d57 * K[7][i] + d58 * K[8][i] + d59 * K[9][i] +
                               d510 * K[10][i] + d511 * K[11][i] + d512 * K[12][i];
                r[6 * n + i] = d61 * K[1][i] + d66 * K[6][i] + d67 * K[7][i] + d68 * K[8][i] + d69 * K[9][i] +
                               d610 * K[10][i] + d611 * K[11][i] + d612 * K[12][i];
                r[7 * n + i] = d71 * K[1][i] + d76 * K[6][i] + d77 * K[7][i] + d78 * K[8][i] + d79 * K[9][i] +
                               d710 * K[10][i] + d711 * K[11][i] + d712 * K[12][i];
            }
            stage(14, c14,
                  {{1, a141}, {7, a147}, {8, a148}, {9, a149}, {10, a1410}, {11, a1411}, {12, a1412},
                   {13, a1413}});
            stage(15, c15,
                  {{1, a151}, {6, a156}, {7, a157}, {8, a158}, {11, a1511}, {12, a1512}, {13, a1513},
                   {14, a1514}});
            stage(16, c16,
                  {{1, a161}, {6, a166}, {7, a167}, {8, a168}, {9, a169}, {13, a1613}, {14, a1614},
                   {15, a1615}});
            for (std::size_t i = 0; i < n; ++i) {
                r[4 * n + i] = h * (r[4 * n + i] + d413 * K[13][i] + d414 * K[14][i] + d415 * K[15][i] +
                                    d416 * K[16][i]);
                r[5 * n + i] = h * (r[5 * n + i] + d513 * K[13][i] + d514 * K[14][i] + d515 * K[15][i] +
                                    d516 * K[16][i]);
                r[6 * n + i] = h * (r[6 * n + i] + d613 * K[13][i] + d614 * K[14][i] + d615 * K[15][i] +
                                    d616 * K[16][i]);
                r[7 * n + i] = h * (r[7 * n + i] + d713 * K[13][i] + d714 * K[14][i] + d715 * K[15][i] +
                                    d716 * K[16][i]);
            }
            sol.segs_.push_back(std::move(seg));

            K[1] = K[13];
            y = y1;
            t += h;
            if (last) break;
            if (std::abs(hnew) > hmax) hnew = posneg * hmax;
            if (reject) hnew = posneg * std::min(std::abs(hnew), std::abs(h));
            reject = false;
        } else {
            hnew = h / std::min(1.0 / fac1, fac11 / safe);
            reject = true;
            last = false;
            ++sol.rejected_;
        }
        h = hnew;
    }
    sol.t_end_ = t1;
    return sol;
}

std::vector<double> uniform_grid(double t0, double t1, std::size_t samples) {
    if (samples < 2) throw ValidationError("uniform_grid: need at least 2 samples");
    std::vector<double> g(samples);
    for (std::size_t i = 0; i < samples; ++i)
        g[i] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(samples - 1);
    g.back() = t1;
    return g;
}

Trajectory integrate(const VectorField& field, const std::vector<double>& y0, const std::vector<double>& grid,
                     const IntegratorOptions& opts, std::vector<std::string> coordinate_names,
                     const InvariantSet* invariants) {
    if (grid.size() < 2) throw ValidationError("integrate: time grid needs at least 2 points");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw ValidationError("integrate: time grid must be strictly increasing");
    if (!coordinate_names.empty() && coordinate_names.size() != y0.size())
        throw DimensionError("integrate: coordinate name count does not match state size");

    const DenseSolution sol = solve_dense(field, y0, grid.front(), grid.back(), opts);
    Trajectory traj;
    traj.times = grid;
    traj.states.reserve(grid.size());
    traj.states.push_back(y0);
    for (std::size_t i = 1; i < grid.size(); ++i) traj.states.push_back(sol(grid[i]));
    if (coordinate_names.empty())
        for (std::size_t i = 0; i < y0.size(); ++i) coordinate_names.push_back("y" + std::to_string(i));
    traj.coordinate_names = std::move(coordinate_names);
    if (invariants) attach_invariants(traj, *invariants);
    return traj;
}

DriftTable conservation_report(const Trajectory& traj, const InvariantSet& invariants) {
    if (traj.states.empty()) throw ValidationError("conservation_report: empty trajectory");
    const auto& names = invariants.names();
    DriftTable table(names.size());
    const std::vector<double> v0 = invariants.evaluate(traj.states.front());
    for (std::size_t k = 0; k < names.size(); ++k) {
        table[k].name = names[k];
        table[k].initial = v0[k];
    }
    for (const auto& s : traj.states) {
        const std::vector<double> v = invariants.evaluate(s);
        for (std::size_t k = 0; k < v.size(); ++k)
            table[k].max_abs = std::max(table[k].max_abs, std::abs(v[k] - v0[k]));
    }
    for (auto& row : table) row.max_rel = row.initial != 0.0 ? row.max_abs / std::abs(row.initial) : row.max_abs;
    return table;
}

DriftTable attach_invariants(Trajectory& traj, const InvariantSet& invariants) {
    traj.invariant_names = invariants.names();
    traj.invariants.clear();
    for (const auto& s : traj.states) traj.invariants.push_back(invariants.evaluate(s));
    DriftTable table = conservation_report(traj, invariants);
    traj.drift.clear();
    for (const auto& row : table) traj.drift.push_back(row.max_rel);
    return table;
}

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void write_csv(std::ostream& os, const Trajectory& traj) {
    os << "t";
    for (const auto& c : traj.coordinate_names) os << ',' << c;
    for (const auto& c : traj.invariant_names) os << ',' << c;
    os << '\n';
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        os << format_double(traj.times[i]);
        for (double v : traj.states[i]) os << ',' << format_double(v);
        if (i < traj.invariants.size())
            for (double v : traj.invariants[i]) os << ',' << format_double(v);
        os << '\n';
    }
}

void write_csv(const std::string& path, const Trajectory& traj) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    write_csv(f, traj);
    if (!f) throw IoError("write failed for " + path);
}

void write_drift_csv(std::ostream& os, const DriftTable& table) {
    os << "name,initial,max_abs_drift,max_rel_drift\n";
    for (const auto& r : table)
        os << r.name << ',' << format_double(r.initial) << ',' << format_double(r.max_abs) << ','
           << format_double(r.max_rel) << '\n';
}

VectorField make_wave_field(const SystemParams& params, WaveFlow kind) {
    params.validate();
    const Eigen::Index n = params.n_plus(), m = params.n_minus();
    return [params, kind, n, m](double, std::span<const double> y, std::span<double> dy) {
        const WaveState s{unflatten(y, n, m)};
        ComplexMatrix Zd;
        switch (kind) {
        case WaveFlow::Quartic: Zd = quartic_vector_field(params, s); break;
        case WaveFlow::Quintic: Zd = quintic_vector_field(params, s); break;
        case WaveFlow::Hierarchy: Zd = hierarchy_vector_field(params, s); break;
        }
        std::size_t p = 0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < m; ++j, p += 2) {
                dy[p] = Zd(i, j).real();
                dy[p + 1] = Zd(i, j).imag();
            }
    };
}

} // namespace nwave
