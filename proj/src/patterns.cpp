#include "qhd/patterns.hpp"

#include <algorithm>
#include <bit>
#include <regex>

#include "qhd/error.hpp"
#include "qhd/statespace.hpp"

namespace qhd {

namespace {

[[noreturn]] void unrealizable(const std::string& what) {
    throw Error(ErrorKind::unrealizable_pattern, "patterns", what);
}

// Largest radius-1 packing of a width x height open block, by row transfer.
int max_block_packing(int width, int height) {
    std::vector<std::uint32_t> rows;
    for (std::uint32_t m = 0; m < (std::uint32_t{1} << width); ++m)
        if ((m & (m >> 1)) == 0) rows.push_back(m);
    std::vector<int> best(rows.size(), 0), next(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) best[r] = std::popcount(rows[r]);
    for (int y = 1; y < height; ++y) {
        for (std::size_t r = 0; r < rows.size(); ++r) {
            int b = -1;
            for (std::size_t p = 0; p < rows.size(); ++p)
                if ((rows[r] & rows[p]) == 0) b = std::max(b, best[p]);
            next[r] = b + std::popcount(rows[r]);
        }
        std::swap(best, next);
    }
    return *std::max_element(best.begin(), best.end());
}

}  // namespace

SiteOccupation occupation_of(std::span<const int> sites, int num_sites) {
    SiteOccupation occ(static_cast<std::size_t>(num_sites), 0);
    for (int s : sites) occ.at(static_cast<std::size_t>(s)) = 1;
    return occ;
}

std::vector<int> crystal_1d(const Lattice& lattice, int M, int spacing) {
    if (lattice.dim() != 1) unrealizable("crystal-1d needs a 1D lattice");
    if (M < 1 || spacing < 1) unrealizable("crystal-1d needs M >= 1 and spacing >= 1");
    const int start = (lattice.L() - 1) / 2 - ((M - 1) * spacing) / 2;
    const int last = start + (M - 1) * spacing;
    if (start < 0 || last >= lattice.L()) unrealizable("crystal-1d does not fit the chain");
    std::vector<int> sites;
    for (int k = 0; k < M; ++k) sites.push_back(start + k * spacing);
    if (!is_valid(sites, lattice)) unrealizable("crystal-1d spacing violates the exclusion radius");
    return sites;
}

std::vector<int> block_crystal(const Lattice& lattice, int k) {
    if (lattice.dim() != 2) unrealizable("block-crystal needs a 2D lattice");
    if (k < 1 || 2 * (k - 1) >= lattice.L()) unrealizable("block-crystal does not fit the lattice");
    std::vector<int> sites;
    for (int y = 0; y < k; ++y)
        for (int x = 0; x < k; ++x) sites.push_back(lattice.site({2 * x, 2 * y}));
    std::sort(sites.begin(), sites.end());
    if (!is_valid(sites, lattice)) unrealizable("block-crystal violates the exclusion radius");
    return sites;
}

std::vector<int> bottom_half_packed(const Lattice& lattice) {
    if (lattice.dim() != 2) unrealizable("bottom-half-packed needs a 2D lattice");
    if (lattice.spec().exclusion_radius != 1) unrealizable("bottom-half-packed needs exclusion radius 1");
    const int L = lattice.L();
    const int rows = L / 2;
    // Greedy smallest-site-first packing is the lexicographically smallest
    // maximal set; it must also reach the exact maximum.
    std::vector<int> sites;
    std::vector<char> blocked(static_cast<std::size_t>(lattice.num_sites()), 0);
    for (int s = 0; s < L * rows; ++s) {
        if (blocked[static_cast<std::size_t>(s)]) continue;
        sites.push_back(s);
        for (int t : lattice.exclusion_neighbors(s)) blocked[static_cast<std::size_t>(t)] = 1;
    }
    if (static_cast<int>(sites.size()) != max_block_packing(L, rows))
        unrealizable("greedy half packing is not maximum");
    return sites;
}

std::vector<int> pattern_library(const std::string& name, const Lattice& lattice, int M) {
    std::vector<int> sites;
    std::smatch match;
    static const std::regex block_re(R"(block-crystal(?:\((\d+)\))?)");
    if (name == "crystal-1d") {
        sites = crystal_1d(lattice, M > 0 ? M : 5);
    } else if (name == "bottom-half-packed") {
        sites = bottom_half_packed(lattice);
    } else if (std::regex_match(name, match, block_re)) {
        int k = 0;
        if (match[1].matched) {
            k = std::stoi(match[1].str());
        } else {
            while ((k + 1) * (k + 1) <= M) ++k;
            if (k * k != M) unrealizable("block-crystal needs a square particle count");
        }
        sites = block_crystal(lattice, k);
    } else {
        unrealizable("unknown pattern '" + name + "'");
    }
    if (M > 0 && static_cast<int>(sites.size()) != M)
        unrealizable("pattern '" + name + "' holds " + std::to_string(sites.size()) +
                     " particles, expected " + std::to_string(M));
    return sites;
}

}  // namespace qhd
