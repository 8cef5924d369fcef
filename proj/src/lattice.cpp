#include "qhd/lattice.hpp"

#include <cstdlib>
#include <string>

#include "qhd/error.hpp"

namespace qhd {

namespace {

// Signed displacement along one axis, minimum image when periodic.
int axis_delta(int a, int b, int L, bool periodic) {
    int d = b - a;
    if (periodic) {
        d = ((d % L) + L) % L;
        if (d > L / 2) d -= L;
    }
    return d;
}

}  // namespace

Lattice::Lattice(const LatticeSpec& spec) : spec_(spec) {
    if (spec.dim != 1 && spec.dim != 2)
        throw Error(ErrorKind::invalid_argument, "lattice",
                    "dim must be 1 or 2, got " + std::to_string(spec.dim));
    if (spec.L < 2)
        throw Error(ErrorKind::invalid_argument, "lattice",
                    "L must be >= 2, got " + std::to_string(spec.L));
    if (spec.exclusion_radius < 1)
        throw Error(ErrorKind::invalid_argument, "lattice", "exclusion_radius must be >= 1");

    const int L = spec.L;
    num_sites_ = spec.dim == 1 ? L : L * L;
    const auto n = static_cast<std::size_t>(num_sites_);
    coords_.resize(n);
    for (int s = 0; s < num_sites_; ++s) coords_[static_cast<std::size_t>(s)] = {s % L, s / L};

    const bool per = periodic();
    steps_.assign(n * 4, -1);
    for (int s = 0; s < num_sites_; ++s) {
        const Coord c = coord(s);
        const int dx[4] = {1, -1, 0, 0};
        const int dy[4] = {0, 0, 1, -1};
        for (int d = 0; d < 2 * spec.dim; ++d) {
            int x = c.x + dx[d];
            int y = c.y + dy[d];
            if (per) {
                x = (x + L) % L;
                y = spec.dim == 2 ? (y + L) % L : 0;
            } else if (x < 0 || x >= L || y < 0 || (spec.dim == 2 ? y >= L : y != 0)) {
                continue;
            }
            steps_[static_cast<std::size_t>(s) * 4 + static_cast<std::size_t>(d)] = site({x, y});
        }
    }

    const int r = spec.exclusion_radius;
    hop_offsets_.push_back(0);
    excl_offsets_.push_back(0);
    for (int s = 0; s < num_sites_; ++s) {
        const Coord a = coord(s);
        for (int t = 0; t < num_sites_; ++t) {
            if (t == s) continue;
            const Coord b = coord(t);
            const int dx = axis_delta(a.x, b.x, L, per);
            const int dy = spec.dim == 2 ? axis_delta(a.y, b.y, L, per) : 0;
            const int d2 = dx * dx + dy * dy;
            if (d2 == 1) hop_.push_back(t);
            if (d2 <= r * r) excl_.push_back(t);
        }
        hop_offsets_.push_back(static_cast<int>(hop_.size()));
        excl_offsets_.push_back(static_cast<int>(excl_.size()));
    }
}

std::span<const int> Lattice::hop_neighbors(int site) const noexcept {
    const auto s = static_cast<std::size_t>(site);
    return {hop_.data() + hop_offsets_[s], static_cast<std::size_t>(hop_offsets_[s + 1] - hop_offsets_[s])};
}

std::span<const int> Lattice::exclusion_neighbors(int site) const noexcept {
    const auto s = static_cast<std::size_t>(site);
    return {excl_.data() + excl_offsets_[s],
            static_cast<std::size_t>(excl_offsets_[s + 1] - excl_offsets_[s])};
}

Lattice build_lattice(const LatticeSpec& spec) { return Lattice(spec); }

Bipartition bottom_half_bipartition(const Lattice& lattice) {
    if (lattice.dim() != 2)
        throw Error(ErrorKind::invalid_argument, "lattice",
                    "bottom-half bipartition needs a 2D lattice; use left_half_bipartition in 1D");
    Bipartition part;
    const int rows_a = lattice.L() / 2;
    for (int s = 0; s < lattice.num_sites(); ++s)
        (lattice.coord(s).y < rows_a ? part.set_a : part.set_b).push_back(s);
    return part;
}

Bipartition left_half_bipartition(const Lattice& lattice) {
    if (lattice.dim() != 1)
        throw Error(ErrorKind::invalid_argument, "lattice", "left-half bipartition needs a 1D lattice");
    Bipartition part;
    for (int s = 0; s < lattice.num_sites(); ++s)
        (s < lattice.L() / 2 ? part.set_a : part.set_b).push_back(s);
    return part;
}

}  // namespace qhd
