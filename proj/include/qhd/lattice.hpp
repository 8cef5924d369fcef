#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace qhd {

enum class Boundary { open, periodic };

struct LatticeSpec {
    int dim = 1;
    int L = 2;
    Boundary boundary = Boundary::open;
    int exclusion_radius = 1;
};

/// Integer site coordinate; y is unused (zero) in 1D.
struct Coord {
    int x = 0;
    int y = 0;
    friend bool operator==(const Coord&, const Coord&) = default;
};

/// Square lattice geometry with row-major site indexing (index = y * L + x).
///
/// Hop neighbors are the nearest neighbors. Exclusion neighbors are all sites
/// within Euclidean distance `exclusion_radius` (measured with minimum image
/// under periodic boundaries), excluding the site itself. Both lists are
/// sorted ascending.
class Lattice {
public:
    explicit Lattice(const LatticeSpec& spec);

    const LatticeSpec& spec() const noexcept { return spec_; }
    int dim() const noexcept { return spec_.dim; }
    int L() const noexcept { return spec_.L; }
    bool periodic() const noexcept { return spec_.boundary == Boundary::periodic; }
    int num_sites() const noexcept { return num_sites_; }

    Coord coord(int site) const noexcept { return coords_[static_cast<std::size_t>(site)]; }
    int site(Coord c) const noexcept { return c.y * spec_.L + c.x; }

    std::span<const int> hop_neighbors(int site) const noexcept;
    std::span<const int> exclusion_neighbors(int site) const noexcept;

    /// Neighbor of `site` along one of the 2*dim axis directions
    /// (0:+x, 1:-x, 2:+y, 3:-y), or -1 when the move leaves an open lattice.
    int step(int site, int direction) const noexcept {
        return steps_[static_cast<std::size_t>(site) * 4 + static_cast<std::size_t>(direction)];
    }
    int num_directions() const noexcept { return 2 * spec_.dim; }

private:
    LatticeSpec spec_;
    int num_sites_ = 0;
    std::vector<Coord> coords_;
    std::vector<int> hop_offsets_, hop_;
    std::vector<int> excl_offsets_, excl_;
    std::vector<int> steps_;
};

Lattice build_lattice(const LatticeSpec& spec);

struct Bipartition {
    std::vector<int> set_a;
    std::vector<int> set_b;
};

/// A = rows y < floor(L/2). Rejects 1D lattices.
Bipartition bottom_half_bipartition(const Lattice& lattice);

/// A = sites x < floor(L/2) of a chain. Rejects 2D lattices.
Bipartition left_half_bipartition(const Lattice& lattice);

}  // namespace qhd
