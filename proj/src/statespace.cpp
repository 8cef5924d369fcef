#include "qhd/statespace.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <limits>
#include <numeric>
#include <string>

namespace qhd {

namespace {

constexpr std::uint64_t kCountOverflow = std::numeric_limits<std::uint64_t>::max();

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r = 0;
    if (__builtin_add_overflow(a, b, &r))
        throw Error(ErrorKind::capacity_exceeded, "statespace", "sector count overflows 64 bits");
    return r;
}

std::uint64_t binomial(std::int64_t n, std::int64_t k) {
    if (k < 0 || n < 0 || k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 r = 1;
    for (std::int64_t i = 1; i <= k; ++i) {
        r = r * static_cast<unsigned __int128>(n - k + i) / static_cast<unsigned __int128>(i);
        if (r > kCountOverflow)
            throw Error(ErrorKind::capacity_exceeded, "statespace", "sector count overflows 64 bits");
    }
    return static_cast<std::uint64_t>(r);
}

bool radius_one(const Lattice& lattice) { return lattice.spec().exclusion_radius == 1; }

// Valid single-row patterns of a radius-1 square lattice.
std::vector<std::uint32_t> valid_rows(int L, bool periodic) {
    std::vector<std::uint32_t> rows;
    const std::uint32_t full = (std::uint32_t{1} << L) - 1;
    for (std::uint32_t m = 0; m <= full; ++m) {
        if (m & (m >> 1)) continue;
        if (periodic && (m & 1u) && (m >> (L - 1) & 1u)) continue;
        rows.push_back(m);
    }
    return rows;
}

// ways[k][row][m]: number of fillings of rows 0..k-1 holding m particles,
// compatible with row k carrying pattern rows[row]. Open boundaries only.
class RowTransfer {
public:
    RowTransfer(int L, int max_m) : L_(L), max_m_(max_m), rows_(valid_rows(L, false)) {
        const std::size_t R = rows_.size();
        ways_.assign(static_cast<std::size_t>(L) + 1, std::vector<std::uint64_t>(R * stride(), 0));
        for (std::size_t r = 0; r < R; ++r) at(0, r, 0) = 1;
        for (int k = 1; k <= L; ++k) {
            for (std::size_t above = 0; above < R; ++above) {
                for (std::size_t below = 0; below < R; ++below) {
                    if (rows_[above] & rows_[below]) continue;
                    const int pc = std::popcount(rows_[below]);
                    for (int m = pc; m <= max_m_; ++m) {
                        const std::uint64_t w = at(k - 1, below, m - pc);
                        if (w) at(k, above, m) = checked_add(at(k, above, m), w);
                    }
                }
            }
        }
    }

    const std::vector<std::uint32_t>& rows() const noexcept { return rows_; }

    // Fillings of the lowest k rows with m particles below a row with pattern index r.
    std::uint64_t ways(int k, std::size_t r, int m) const noexcept {
        if (m < 0 || m > max_m_) return 0;
        return ways_[static_cast<std::size_t>(k)][r * stride() + static_cast<std::size_t>(m)];
    }

    // Pattern index 0 is the empty row, which constrains nothing.
    std::uint64_t total(int m) const noexcept { return ways(L_, 0, m); }

private:
    std::size_t stride() const noexcept { return static_cast<std::size_t>(max_m_) + 1; }
    std::uint64_t& at(int k, std::size_t r, int m) {
        return ways_[static_cast<std::size_t>(k)][r * stride() + static_cast<std::size_t>(m)];
    }

    int L_;
    int max_m_;
    std::vector<std::uint32_t> rows_;
    std::vector<std::vector<std::uint64_t>> ways_;
};

std::uint64_t count_periodic_square(int L, int M) {
    const auto rows = valid_rows(L, true);
    const std::size_t R = rows.size();
    const auto stride = static_cast<std::size_t>(M) + 1;
    std::uint64_t total = 0;
    for (std::size_t first = 0; first < R; ++first) {
        const int pc0 = std::popcount(rows[first]);
        if (pc0 > M) continue;
        std::vector<std::uint64_t> cur(R * stride, 0), next(R * stride, 0);
        cur[first * stride + static_cast<std::size_t>(pc0)] = 1;
        for (int y = 1; y < L; ++y) {
            std::fill(next.begin(), next.end(), 0);
            for (std::size_t a = 0; a < R; ++a) {
                for (std::size_t b = 0; b < R; ++b) {
                    if (rows[a] & rows[b]) continue;
                    const int pc = std::popcount(rows[b]);
                    for (int m = 0; m + pc <= M; ++m) {
                        const std::uint64_t w = cur[a * stride + static_cast<std::size_t>(m)];
                        if (w) {
                            auto& slot = next[b * stride + static_cast<std::size_t>(m + pc)];
                            slot = checked_add(slot, w);
                        }
                    }
                }
            }
            std::swap(cur, next);
        }
        for (std::size_t last = 0; last < R; ++last) {
            if (rows[last] & rows[first]) continue;
            total = checked_add(total, cur[last * stride + static_cast<std::size_t>(M)]);
        }
    }
    return total;
}

// Site-by-site depth-first search, highest site first, so configurations are
// produced in ascending numeric order. `emit` may be null for counting only.
class DepthFirst {
public:
    DepthFirst(const HopKernel& kernel, int n_sites, std::vector<Configuration>* out)
        : kernel_(kernel), n_sites_(n_sites), out_(out) {}

    std::uint64_t run(int M) {
        count_ = 0;
        recurse(n_sites_ - 1, M, 0);
        return count_;
    }

private:
    void recurse(int site, int remaining, Configuration acc) {
        if (remaining == 0) {
            ++count_;
            if (out_) out_->push_back(acc);
            return;
        }
        if (site + 1 < remaining) return;
        recurse(site - 1, remaining, acc);
        if ((acc & kernel_.exclusion_mask(site)) == 0)
            recurse(site - 1, remaining - 1, acc | site_bit(site));
    }

    const HopKernel& kernel_;
    int n_sites_;
    std::vector<Configuration>* out_;
    std::uint64_t count_ = 0;
};

// Open radius-1 chain: sites 0..site are all free on entry.
void chain_recurse(int site, int remaining, Configuration acc, std::vector<Configuration>& out) {
    if (remaining == 0) {
        out.push_back(acc);
        return;
    }
    if (site + 1 < 2 * remaining - 1) return;
    chain_recurse(site - 1, remaining, acc, out);
    chain_recurse(site - 2, remaining - 1, acc | site_bit(site), out);
}

// Open radius-1 square lattice: rows from the top down with exact pruning.
void rows_recurse(const RowTransfer& tr, int L, int y, std::size_t above, int remaining,
                  Configuration acc, std::vector<Configuration>& out) {
    if (y < 0) {
        out.push_back(acc);
        return;
    }
    const auto& rows = tr.rows();
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r] & rows[above]) continue;
        const int pc = std::popcount(rows[r]);
        if (pc > remaining || tr.ways(y, r, remaining - pc) == 0) continue;
        rows_recurse(tr, L, y - 1, r, remaining - pc,
                     acc | (static_cast<Configuration>(rows[r]) << (y * L)), out);
    }
}

}  // namespace

Configuration to_configuration(std::span<const int> sites) {
    Configuration c = 0;
    for (int s : sites) {
        if (s < 0 || s >= kMaxBasisSites)
            throw Error(ErrorKind::invalid_argument, "statespace",
                        "site " + std::to_string(s) + " outside the 64-site basis word");
        c |= site_bit(s);
    }
    return c;
}

std::vector<int> occupied_sites(Configuration config) {
    std::vector<int> sites;
    while (config) {
        sites.push_back(__builtin_ctzll(config));
        config &= config - 1;
    }
    return sites;
}

void require_bit_lattice(const Lattice& lattice) {
    if (lattice.num_sites() > kMaxBasisSites)
        throw Error(ErrorKind::invalid_argument, "statespace",
                    "basis operations support at most 64 sites, lattice has " +
                        std::to_string(lattice.num_sites()));
}

bool is_valid(Configuration config, const Lattice& lattice) {
    require_bit_lattice(lattice);
    if (lattice.num_sites() < 64 && (config >> lattice.num_sites()) != 0) return false;
    return HopKernel(lattice).valid(config);
}

bool is_valid(std::span<const int> sites, const Lattice& lattice) {
    std::vector<char> occ(static_cast<std::size_t>(lattice.num_sites()), 0);
    for (int s : sites) {
        if (s < 0 || s >= lattice.num_sites() || occ[static_cast<std::size_t>(s)]) return false;
        occ[static_cast<std::size_t>(s)] = 1;
    }
    for (int s : sites)
        for (int t : lattice.exclusion_neighbors(s))
            if (occ[static_cast<std::size_t>(t)]) return false;
    return true;
}

CapacityExceeded::CapacityExceeded(std::uint64_t count, std::uint64_t cap)
    : Error(ErrorKind::capacity_exceeded, "statespace",
            "sector holds " + std::to_string(count) + " configurations, above the memory cap of " +
                std::to_string(cap)),
      count_(count),
      cap_(cap) {}

HopKernel::HopKernel(const Lattice& lattice) {
    require_bit_lattice(lattice);
    const auto n = static_cast<std::size_t>(lattice.num_sites());
    exclusion_.resize(n);
    hops_.resize(n);
    for (int s = 0; s < lattice.num_sites(); ++s) {
        const auto i = static_cast<std::size_t>(s);
        for (int t : lattice.exclusion_neighbors(s)) exclusion_[i] |= site_bit(t);
        hops_[i].assign(lattice.hop_neighbors(s).begin(), lattice.hop_neighbors(s).end());
    }
}

bool HopKernel::valid(Configuration c) const noexcept {
    Configuration rest = c;
    while (rest) {
        const int s = __builtin_ctzll(rest);
        rest &= rest - 1;
        if (c & exclusion_[static_cast<std::size_t>(s)]) return false;
    }
    return true;
}

std::uint64_t count_sector(const Lattice& lattice, int M) {
    const int n = lattice.num_sites();
    if (M < 0 || M > n) return 0;
    if (M == 0) return 1;
    const int L = lattice.L();
    if (radius_one(lattice)) {
        if (lattice.dim() == 1) {
            if (!lattice.periodic()) return binomial(L - M + 1, M);
            // Independent sets of size M on a cycle: L/(L-M) * C(L-M, M).
            if (L == 2) return M == 1 ? 2 : 0;
            if (2 * M > L) return 0;
            const unsigned __int128 c = binomial(L - M, M);
            return static_cast<std::uint64_t>(c * static_cast<unsigned>(L) / static_cast<unsigned>(L - M));
        }
        if (L <= 16) {
            if (lattice.periodic()) return count_periodic_square(L, M);
            return RowTransfer(L, M).total(M);
        }
    }
    const HopKernel kernel(lattice);
    return DepthFirst(kernel, n, nullptr).run(M);
}

BasisTable::BasisTable(Lattice lattice, int M, std::vector<Configuration> configs)
    : lattice_(std::move(lattice)), M_(M), configs_(std::move(configs)) {}

std::optional<std::size_t> BasisTable::index_of(Configuration config) const noexcept {
    const auto it = std::lower_bound(configs_.begin(), configs_.end(), config);
    if (it == configs_.end() || *it != config) return std::nullopt;
    return static_cast<std::size_t>(it - configs_.begin());
}

BasisTable BasisTable::subset(std::span<const std::size_t> ordinals) const {
    std::vector<Configuration> picked;
    picked.reserve(ordinals.size());
    for (std::size_t i : ordinals) picked.push_back(configs_.at(i));
    return BasisTable(lattice_, M_, std::move(picked));
}

BasisTable enumerate_sector(const Lattice& lattice, int M, std::uint64_t memory_cap) {
    require_bit_lattice(lattice);
    const std::uint64_t count = count_sector(lattice, M);
    if (count > memory_cap) throw CapacityExceeded(count, memory_cap);

    std::vector<Configuration> configs;
    configs.reserve(count);
    const int n = lattice.num_sites();
    if (M >= 0 && M <= n) {
        const bool open_r1 = radius_one(lattice) && !lattice.periodic();
        if (open_r1 && lattice.dim() == 1) {
            chain_recurse(n - 1, M, 0, configs);
        } else if (open_r1 && lattice.L() <= 24) {
            const RowTransfer tr(lattice.L(), M);
            rows_recurse(tr, lattice.L(), lattice.L() - 1, 0, M, 0, configs);
        } else {
            const HopKernel kernel(lattice);
            DepthFirst(kernel, n, &configs).run(M);
        }
    }
    return BasisTable(lattice, M, std::move(configs));
}

std::vector<Configuration> hop_successors(Configuration config, const Lattice& lattice) {
    std::vector<Configuration> out;
    HopKernel(lattice).for_each_successor(config, [&](Configuration c) { out.push_back(c); });
    std::sort(out.begin(), out.end());
    return out;
}

std::size_t FragmentDecomposition::largest_size() const noexcept {
    std::size_t best = 0;
    for (const auto& f : fragments) best = std::max(best, f.size);
    return best;
}

std::size_t FragmentDecomposition::largest_id() const noexcept {
    std::size_t best = 0, id = 0;
    for (const auto& f : fragments)
        if (f.size > best) best = f.size, id = f.id;
    return id;
}

double FragmentDecomposition::ratio_max() const noexcept {
    if (labels.empty()) return 0.0;
    return static_cast<double>(largest_size()) / static_cast<double>(labels.size());
}

const Fragment* FragmentDecomposition::find(std::size_t fragment_id) const noexcept {
    const auto it = std::lower_bound(fragments.begin(), fragments.end(), fragment_id,
                                     [](const Fragment& f, std::size_t id) { return f.id < id; });
    if (it == fragments.end() || it->id != fragment_id) return nullptr;
    return &*it;
}

std::vector<std::size_t> FragmentDecomposition::members(std::size_t fragment_id) const {
    if (!find(fragment_id))
        throw Error(ErrorKind::unknown_fragment, "statespace",
                    "no fragment with id " + std::to_string(fragment_id));
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == fragment_id) out.push_back(i);
    return out;
}

FragmentDecomposition fragment_decomposition(const BasisTable& basis) {
    const HopKernel kernel(basis.lattice());
    const std::size_t n = basis.size();

    // Union-find where every root is the smallest ordinal of its component.
    std::vector<std::uint32_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0u);
    auto find = [&](std::uint32_t x) {
        std::uint32_t root = x;
        while (parent[root] != root) root = parent[root];
        while (parent[x] != root) {
            const std::uint32_t next = parent[x];
            parent[x] = root;
            x = next;
        }
        return root;
    };

    for (std::size_t i = 0; i < n; ++i) {
        const Configuration c = basis[i];
        kernel.for_each_successor(c, [&](Configuration s) {
            if (s < c) return;  // each edge once, from its smaller endpoint
            const auto j = basis.index_of(s);
            if (!j) return;
            const std::uint32_t a = find(static_cast<std::uint32_t>(i));
            const std::uint32_t b = find(static_cast<std::uint32_t>(*j));
            if (a < b) parent[b] = a;
            else if (b < a) parent[a] = b;
        });
    }

    FragmentDecomposition out;
    out.labels.resize(n);
    std::vector<std::size_t> sizes(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        out.labels[i] = find(static_cast<std::uint32_t>(i));
        ++sizes[out.labels[i]];
    }
    for (std::size_t i = 0; i < n; ++i)
        if (sizes[i]) out.fragments.push_back({i, sizes[i]});
    return out;
}

std::vector<std::size_t> fragment_of(const BasisTable& basis, Configuration config) {
    const auto start = basis.index_of(config);
    if (!start)
        throw Error(ErrorKind::not_in_basis, "statespace", "configuration is not in the sector basis");
    const HopKernel kernel(basis.lattice());
    std::vector<bool> seen(basis.size(), false);
    std::vector<std::size_t> members{*start};
    seen[*start] = true;
    for (std::size_t head = 0; head < members.size(); ++head) {
        kernel.for_each_successor(basis[members[head]], [&](Configuration s) {
            const auto j = basis.index_of(s);
            if (j && !seen[*j]) {
                seen[*j] = true;
                members.push_back(*j);
            }
        });
    }
    std::sort(members.begin(), members.end());
    return members;
}

const char* to_string(FragmentationClass cls) noexcept {
    switch (cls) {
        case FragmentationClass::unfragmented: return "unfragmented";
        case FragmentationClass::weak: return "weak";
        case FragmentationClass::strong: return "strong";
    }
    return "unknown";
}

DensityVerdict classify_density(int L, int M, int dim) {
    DensityVerdict v;
    if (dim == 1) {
        // Maximum packing of an open chain holds ceil(L/2) particles.
        v.needs_empirical_check = M >= (L + 1) / 2;
        return v;
    }
    const int ceil_half = (L + 1) / 2;
    // ceil(L^2/2 - ceil(L/2)) in integers.
    v.weak_threshold = L;
    v.strong_threshold = (L * L + 1) / 2 - ceil_half;
    if (M >= v.strong_threshold) v.cls = FragmentationClass::strong;
    else if (M >= v.weak_threshold) v.cls = FragmentationClass::weak;
    return v;
}

}  // namespace qhd
