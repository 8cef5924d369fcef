#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qhd/error.hpp"
#include "qhd/lattice.hpp"

namespace qhd {

/// Occupation bit pattern: bit i is n_i. Basis work is limited to 64 sites.
using Configuration = std::uint64_t;

inline constexpr int kMaxBasisSites = 64;
inline constexpr std::uint64_t kDefaultMemoryCap = 20'000'000;

inline constexpr Configuration site_bit(int site) noexcept { return Configuration{1} << site; }

Configuration to_configuration(std::span<const int> sites);
std::vector<int> occupied_sites(Configuration config);

/// Throws unless the lattice fits in a Configuration word.
void require_bit_lattice(const Lattice& lattice);

bool is_valid(Configuration config, const Lattice& lattice);
/// Site-list form, usable on lattices of any size. Duplicate sites are invalid.
bool is_valid(std::span<const int> sites, const Lattice& lattice);

class CapacityExceeded : public Error {
public:
    CapacityExceeded(std::uint64_t count, std::uint64_t cap);
    std::uint64_t count() const noexcept { return count_; }
    std::uint64_t cap() const noexcept { return cap_; }

private:
    std::uint64_t count_;
    std::uint64_t cap_;
};

/// Number of valid M-particle configurations, computed without materializing
/// them: closed forms for radius-1 chains, a row transfer recursion for
/// radius-1 square lattices, and a pruned depth-first count otherwise.
std::uint64_t count_sector(const Lattice& lattice, int M);

/// Precomputed per-site masks for fast validity and hop checks.
class HopKernel {
public:
    explicit HopKernel(const Lattice& lattice);

    bool valid(Configuration c) const noexcept;

    /// Calls f(successor) for every configuration reachable by one allowed
    /// nearest-neighbor hop, ordered by (source site, target site).
    template <class F>
    void for_each_successor(Configuration c, F&& f) const {
        Configuration rest = c;
        while (rest) {
            const int j = __builtin_ctzll(rest);
            rest &= rest - 1;
            const Configuration others = c & ~site_bit(j);
            for (int i : hops_[static_cast<std::size_t>(j)]) {
                if ((c & site_bit(i)) == 0 && (others & exclusion_[static_cast<std::size_t>(i)]) == 0)
                    f(others | site_bit(i));
            }
        }
    }

    Configuration exclusion_mask(int site) const noexcept {
        return exclusion_[static_cast<std::size_t>(site)];
    }

private:
    std::vector<Configuration> exclusion_;
    std::vector<std::vector<int>> hops_;
};

/// All valid configurations of one sector in ascending numeric order.
class BasisTable {
public:
    BasisTable(Lattice lattice, int M, std::vector<Configuration> configs);

    const Lattice& lattice() const noexcept { return lattice_; }
    int M() const noexcept { return M_; }
    double density() const noexcept { return static_cast<double>(M_) / lattice_.num_sites(); }
    std::size_t size() const noexcept { return configs_.size(); }
    const std::vector<Configuration>& configs() const noexcept { return configs_; }
    Configuration operator[](std::size_t i) const noexcept { return configs_[i]; }

    /// Ordinal of `config`, binary search over the sorted table.
    std::optional<std::size_t> index_of(Configuration config) const noexcept;

    /// Table restricted to the given ascending ordinals.
    BasisTable subset(std::span<const std::size_t> ordinals) const;

private:
    Lattice lattice_;
    int M_;
    std::vector<Configuration> configs_;
};

BasisTable enumerate_sector(const Lattice& lattice, int M,
                            std::uint64_t memory_cap = kDefaultMemoryCap);

/// Sorted successors of `config` under single nearest-neighbor hops.
std::vector<Configuration> hop_successors(Configuration config, const Lattice& lattice);

struct Fragment {
    std::size_t id = 0;  // ordinal of the smallest member in the sector basis
    std::size_t size = 0;
};

/// Connected components of the configuration graph.
struct FragmentDecomposition {
    std::vector<std::uint32_t> labels;  // per configuration: fragment id
    std::vector<Fragment> fragments;    // ascending by id
    std::size_t n_fragments() const noexcept { return fragments.size(); }
    std::size_t largest_size() const noexcept;
    std::size_t largest_id() const noexcept;  // smallest id among the largest
    double ratio_max() const noexcept;

    std::vector<std::size_t> members(std::size_t fragment_id) const;
    const Fragment* find(std::size_t fragment_id) const noexcept;
};

FragmentDecomposition fragment_decomposition(const BasisTable& basis);

/// Sorted ordinals of the fragment containing `config`, found by breadth-first
/// search from it. Throws not_in_basis if the configuration is absent.
std::vector<std::size_t> fragment_of(const BasisTable& basis, Configuration config);

enum class FragmentationClass { unfragmented, weak, strong };

const char* to_string(FragmentationClass cls) noexcept;

struct DensityVerdict {
    FragmentationClass cls = FragmentationClass::unfragmented;
    /// Set for the 1D maximum-density sector, whose structure depends on the
    /// boundary and must be read off an actual decomposition.
    bool needs_empirical_check = false;
    /// Smallest M of the weak and strong regimes (2D only).
    int weak_threshold = 0;
    int strong_threshold = 0;
};

/// Threshold prediction: weak from M >= L, strong from M >= ceil(L^2/2 - ceil(L/2)).
DensityVerdict classify_density(int L, int M, int dim);

}  // namespace qhd
