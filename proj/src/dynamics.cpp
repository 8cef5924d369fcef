#include "qhd/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace qhd {

namespace {

using CVec = std::vector<cplx>;

cplx dot(const CVec& a, const CVec& b) {
    cplx s0{}, s1{};
    const std::size_t n = a.size();
    std::size_t i = 0;
    for (; i + 1 < n; i += 2) {
        s0 += std::conj(a[i]) * b[i];
        s1 += std::conj(a[i + 1]) * b[i + 1];
    }
    if (i < n) s0 += std::conj(a[i]) * b[i];
    return s0 + s1;
}

double norm2(const CVec& a) {
    double s = 0.0;
    for (const auto& z : a) s += z.real() * z.real() + z.imag() * z.imag();
    return std::sqrt(s);
}

// Krylov vectors kept between steps so large buffers are allocated once.
struct KrylovWorkspace {
    Eigen::MatrixXcd V;
    Eigen::VectorXcd w, c;

    void reserve(Eigen::Index n, int m) {
        if (V.rows() != n || V.cols() < m) V.resize(n, m);
        w.resize(n);
    }
};

// Lanczos tridiagonalization of H on span{psi, H psi, ...}. Each new vector
// gets the three-term recurrence followed by one classical Gram-Schmidt pass
// against all earlier vectors.
class Lanczos {
public:
    Lanczos(const SparseHamiltonian& H, const CVec& psi, int m, KrylovWorkspace& ws) : ws_(ws) {
        const auto n = static_cast<Eigen::Index>(psi.size());
        ws.reserve(n, m);
        auto& V = ws.V;
        auto& w = ws.w;
        const Eigen::Map<const Eigen::VectorXcd> p(psi.data(), n);
        V.col(0) = p / p.norm();
        for (int j = 0; j < m; ++j) {
            H.apply(std::span<const cplx>(V.col(j).data(), psi.size()), std::span<cplx>(w.data(), psi.size()));
            const double a = V.col(j).dot(w).real();
            alpha_.push_back(a);
            if (j + 1 == m) break;
            const double b_prev = j > 0 ? beta_.back() : 0.0;
            w -= a * V.col(j);
            if (j > 0) w -= b_prev * V.col(j - 1);
            const auto basis = V.leftCols(j + 1);
            ws.c.noalias() = basis.adjoint() * w;
            w.noalias() -= basis * ws.c;
            const double b = w.norm();
            const double scale = std::max({1.0, std::abs(a), b_prev});
            if (b <= 1e-12 * scale) break;  // invariant subspace reached
            beta_.push_back(b);
            V.col(j + 1) = w / b;
        }
    }

    int size() const noexcept { return static_cast<int>(alpha_.size()); }

    // exp(-i T_k dt) e_1 for the leading k x k block of T.
    Eigen::VectorXcd small_propagator(int k, double dt) const {
        Eigen::VectorXd diag(k), sub(std::max(k - 1, 0));
        for (int i = 0; i < k; ++i) diag[i] = alpha_[static_cast<std::size_t>(i)];
        for (int i = 0; i + 1 < k; ++i) sub[i] = beta_[static_cast<std::size_t>(i)];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        const Eigen::MatrixXd& Q = es.eigenvectors();
        Eigen::VectorXcd phase(k);
        for (int i = 0; i < k; ++i) phase[i] = std::exp(cplx(0.0, -es.eigenvalues()[i] * dt)) * Q(0, i);
        return Q.cast<cplx>() * phase;
    }

    // Returns (coefficients, error estimate) for step dt.
    std::pair<Eigen::VectorXcd, double> propagate(double dt, bool exhausted) const {
        const int k = size();
        Eigen::VectorXcd y = small_propagator(k, dt);
        if (exhausted || k == 1) return {y, 0.0};
        Eigen::VectorXcd diff = y;
        diff.head(k - 1) -= small_propagator(k - 1, dt);
        return {y, diff.norm()};
    }

    void combine(const Eigen::VectorXcd& y, CVec& out) const {
        const Eigen::Index n = ws_.V.rows();
        out.resize(static_cast<std::size_t>(n));
        Eigen::Map<Eigen::VectorXcd> o(out.data(), n);
        o.noalias() = ws_.V.leftCols(y.size()) * y;
        o /= o.norm();
    }

private:
    KrylovWorkspace& ws_;
    std::vector<double> alpha_, beta_;
};

Configuration dominant_configuration(const StateVector& psi, const BasisTable& basis) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < psi.amplitudes.size(); ++i)
        if (std::norm(psi.amplitudes[i]) > std::norm(psi.amplitudes[best])) best = i;
    return basis[best];
}

}  // namespace

StateVector basis_state(const BasisTable& basis, Configuration config) {
    const auto idx = basis.index_of(config);
    if (!idx) throw Error(ErrorKind::not_in_basis, "dynamics", "initial configuration is not in the basis");
    StateVector psi;
    psi.amplitudes.assign(basis.size(), cplx{});
    psi.amplitudes[*idx] = 1.0;
    return psi;
}

KrylovStep krylov_step(const SparseHamiltonian& H, const StateVector& psi, double dt, int m) {
    if (psi.amplitudes.size() != H.dim())
        throw Error(ErrorKind::dimension_mismatch, "dynamics", "state does not match the Hamiltonian");
    if (!(dt > 0.0)) throw Error(ErrorKind::invalid_argument, "dynamics", "dt must be positive");
    if (m < 1) throw Error(ErrorKind::invalid_argument, "dynamics", "Krylov dimension must be >= 1");
    KrylovWorkspace ws;
    const Lanczos lz(H, psi.amplitudes, m, ws);
    const auto [y, err] = lz.propagate(dt, lz.size() < m);
    KrylovStep out{StateVector{{}, psi.time + dt}, err, lz.size()};
    lz.combine(y, out.state.amplitudes);
    return out;
}

std::vector<double> occupations(const StateVector& psi, const BasisTable& basis) {
    std::vector<double> occ(static_cast<std::size_t>(basis.lattice().num_sites()), 0.0);
    for (std::size_t c = 0; c < basis.size(); ++c) {
        const double p = std::norm(psi.amplitudes[c]);
        if (p == 0.0) continue;
        Configuration bits = basis[c];
        while (bits) {
            occ[static_cast<std::size_t>(__builtin_ctzll(bits))] += p;
            bits &= bits - 1;
        }
    }
    return occ;
}

double autocorrelation(std::span<const double> occ, std::span<const std::uint8_t> initial, double eta) {
    if (occ.size() != initial.size())
        throw Error(ErrorKind::dimension_mismatch, "dynamics", "occupation and pattern sizes differ");
    double s = 0.0;
    for (std::size_t i = 0; i < occ.size(); ++i) s += (2.0 * occ[i] - 1.0) * (initial[i] ? 1.0 : -1.0);
    const double g_star = (2.0 * eta - 1.0) * (2.0 * eta - 1.0);
    return s / static_cast<double>(occ.size()) - g_star;
}

double autocorrelation(std::span<const double> occ, Configuration initial, double eta) {
    SiteOccupation pattern(occ.size(), 0);
    for (std::size_t i = 0; i < occ.size(); ++i) pattern[i] = (initial >> i) & 1u;
    return autocorrelation(occ, pattern, eta);
}

double energy(const SparseHamiltonian& H, const StateVector& psi) {
    const auto hpsi = H.apply(std::span<const cplx>(psi.amplitudes));
    return dot(psi.amplitudes, hpsi).real();
}

ObservableSeries adaptive_evolve(const SparseHamiltonian& H, const StateVector& psi0,
                                 std::span<const double> t_grid, const EvolveOptions& options,
                                 std::optional<Configuration> reference) {
    if (psi0.amplitudes.size() != H.dim())
        throw Error(ErrorKind::dimension_mismatch, "dynamics", "state does not match the Hamiltonian");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (t_grid[i] < 0.0 || (i > 0 && t_grid[i] < t_grid[i - 1]))
            throw Error(ErrorKind::invalid_argument, "dynamics", "time grid must be ascending and >= 0");
    }
    const BasisTable& basis = H.basis();
    const Configuration ref = reference ? *reference : dominant_configuration(psi0, basis);
    const double eta = basis.density();

    ObservableSeries out;
    StateVector psi = psi0;
    double dt = std::clamp(options.dt_initial, options.dt_min, options.dt_max);

    auto record = [&] {
        out.times.push_back(psi.time);
        out.occupations.push_back(occupations(psi, basis));
        out.G.push_back(autocorrelation(out.occupations.back(), ref, eta));
        out.norm.push_back(norm2(psi.amplitudes));
        out.energy.push_back(energy(H, psi));
        if (options.on_record) options.on_record(psi);
    };

    KrylovWorkspace ws;
    for (const double target : t_grid) {
        while (psi.time < target) {
            const Lanczos lz(H, psi.amplitudes, options.krylov_dim, ws);
            const bool exhausted = lz.size() < options.krylov_dim;
            const double remaining = target - psi.time;
            double h = std::min(dt, remaining);
            bool trimmed = h < dt;
            auto [y, err] = lz.propagate(h, exhausted);
            while (err > options.tol) {
                if (h <= options.dt_min) {
                    std::ostringstream msg;
                    msg << "Krylov step did not converge at t=" << psi.time << " with dt=" << h
                        << ": error estimate " << err << " > tol " << options.tol;
                    throw Error(ErrorKind::non_convergence, "dynamics", msg.str());
                }
                ++out.rejected_trials;
                h = std::max(h / 2.0, options.dt_min);
                dt = h;
                trimmed = false;
                std::tie(y, err) = lz.propagate(h, exhausted);
            }
            lz.combine(y, psi.amplitudes);
            // Land exactly on the grid point when the step was trimmed.
            psi.time = (h == remaining) ? target : psi.time + h;
            ++out.accepted_steps;
            if (!trimmed) dt = std::min(2.0 * dt, options.dt_max);
        }
        if (psi.time < target) psi.time = target;
        record();
    }
    return out;
}

double rms_radius(std::span<const double> occ, int M) {
    double xbar = 0.0;
    for (std::size_t i = 0; i < occ.size(); ++i) xbar += static_cast<double>(i) * occ[i];
    xbar /= M;
    double s = 0.0;
    for (std::size_t i = 0; i < occ.size(); ++i) {
        const double dx = static_cast<double>(i) - xbar;
        s += dx * dx * occ[i];
    }
    return std::sqrt(s / M);
}

PowerFit loglog_fit(std::span<const double> x, std::span<const double> y, double lo, double hi) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] >= lo && x[i] <= hi && x[i] > 0.0 && y[i] > 0.0) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    }
    PowerFit fit;
    fit.points = lx.size();
    if (lx.size() < 2) return fit;
    const double n = static_cast<double>(lx.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

Melt1dResult melt1d_experiment(int L, int M, int spacing, std::span<const double> t_grid, double fit_lo,
                               double fit_hi, const EvolveOptions& options, double J) {
    const Lattice lattice({1, L, Boundary::open, 1});
    Melt1dResult out;
    out.initial_sites = crystal_1d(lattice, M, spacing);
    const double t_max = t_grid.empty() ? 0.0 : t_grid.back();
    const int margin = std::min(out.initial_sites.front(), L - 1 - out.initial_sites.back());
    if (margin < kGuardVelocity * std::abs(J) * t_max) {
        std::ostringstream msg;
        msg << "crystal margin " << margin << " is below the guard distance "
            << kGuardVelocity * std::abs(J) * t_max << " for t_max=" << t_max;
        out.warnings.push_back(msg.str());
    }

    const BasisTable basis = enumerate_sector(lattice, M);
    const Configuration init = to_configuration(out.initial_sites);
    const SparseHamiltonian H = build_hamiltonian(basis, J);
    out.series = adaptive_evolve(H, basis_state(basis, init), t_grid, options, init);

    double edge_max = 0.0;
    for (const auto& occ : out.series.occupations) {
        out.radius.push_back(rms_radius(occ, M));
        edge_max = std::max({edge_max, occ.front(), occ.back()});
    }
    if (edge_max > kEdgeOccupationLimit) {
        std::ostringstream msg;
        msg << "boundary contact: edge occupation reached " << edge_max;
        out.warnings.push_back(msg.str());
    }
    out.radius_fit = loglog_fit(out.series.times, out.radius, fit_lo, fit_hi);
    return out;
}

}  // namespace qhd
