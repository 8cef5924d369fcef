#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qhd/lattice.hpp"

namespace qhd {

/// Per-site 0/1 occupation, usable on lattices of any size.
using SiteOccupation = std::vector<std::uint8_t>;

SiteOccupation occupation_of(std::span<const int> sites, int num_sites);

/// M particles spaced `spacing` apart, centered on the chain (start =
/// floor((L-1)/2) - floor((M-1)*spacing/2)).
std::vector<int> crystal_1d(const Lattice& lattice, int M, int spacing = 2);

/// k x k particles on even coordinates anchored at the origin corner.
std::vector<int> block_crystal(const Lattice& lattice, int k);

/// A maximum packing of the rows y < floor(L/2), found by exact search; among
/// maximum packings the lexicographically smallest site list is chosen.
std::vector<int> bottom_half_packed(const Lattice& lattice);

/// Named pattern lookup: "crystal-1d", "bottom-half-packed", "block-crystal"
/// or "block-crystal(k)". M <= 0 means "whatever the pattern implies";
/// otherwise the particle count must match. Throws unrealizable_pattern.
std::vector<int> pattern_library(const std::string& name, const Lattice& lattice, int M);

}  // namespace qhd
