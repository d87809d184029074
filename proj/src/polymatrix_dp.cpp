#include <algorithm>
#include <bit>
#include <limits>
#include <map>
#include <string>
#include <unordered_map>

#include "gmhg/errors.hpp"
#include "gmhg/tree_dp.hpp"

namespace gmhg {

namespace {

constexpr __int128 kFastLimit = static_cast<__int128>(1) << 62;

__int128 floor_div(__int128 a, __int128 b) {
  __int128 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

__int128 abs128(__int128 x) { return x < 0 ? -x : x; }

}  // namespace

LinearProjector::LinearProjector(const std::vector<Rational>& weights) {
  Integer den = 1;
  for (const Rational& w : weights) {
    Integer g;
    mpz_lcm(g.get_mpz_t(), den.get_mpz_t(), w.get_den_mpz_t());
    den = g;
  }
  big_den_ = den;
  for (const Rational& w : weights) big_num_.push_back(Integer(w.get_num() * (den / w.get_den())));
  fast_ = mpz_sizeinbase(den.get_mpz_t(), 2) < 62;
  for (const Integer& x : big_num_) fast_ = fast_ && mpz_sizeinbase(x.get_mpz_t(), 2) < 62;
  if (fast_) {
    den_ = static_cast<__int128>(mpz_get_si(den.get_mpz_t()));
    for (const Integer& x : big_num_) num_.push_back(static_cast<__int128>(mpz_get_si(x.get_mpz_t())));
  }
}

std::int64_t LinearProjector::operator()(std::span<const int> n) const {
  if (fast_) {
    __int128 acc = 0;
    for (std::size_t b = 0; b < num_.size(); ++b) acc += static_cast<__int128>(n[b]) * num_[b];
    if (abs128(acc) < kFastLimit * kFastLimit / 8) {
      return static_cast<std::int64_t>(floor_div(2 * acc + den_, 2 * den_));
    }
  }
  Integer acc = 0;
  for (std::size_t b = 0; b < big_num_.size(); ++b) acc += Integer(n[b]) * big_num_[b];
  Integer q;
  Integer top = 2 * acc + big_den_;
  Integer bottom = 2 * big_den_;
  mpz_fdiv_q(q.get_mpz_t(), top.get_mpz_t(), bottom.get_mpz_t());
  return to_int64(q);
}

namespace {

using Vec = std::vector<std::int64_t>;

// Set of integer vectors packed into keys over a fixed box (dimension 0 most
// significant). Dense sets are bitmaps restricted to a word window.
struct KeySet {
  bool dense = false;
  std::size_t word_begin = 0;
  std::vector<std::uint64_t> words;
  std::vector<std::uint64_t> keys;  // sparse, sorted unique

  bool empty() const {
    if (!dense) return keys.empty();
    return std::all_of(words.begin(), words.end(), [](std::uint64_t w) { return w == 0; });
  }
  bool contains(std::uint64_t key) const {
    if (!dense) return std::binary_search(keys.begin(), keys.end(), key);
    const std::size_t w = static_cast<std::size_t>(key / 64);
    if (w < word_begin || w >= word_begin + words.size()) return false;
    return (words[w - word_begin] >> (key % 64)) & 1U;
  }
  template <class F>
  void for_each(F&& f) const {
    if (!dense) {
      for (std::uint64_t k : keys) f(k);
      return;
    }
    for (std::size_t w = 0; w < words.size(); ++w) {
      std::uint64_t bits = words[w];
      while (bits) {
        const int b = std::countr_zero(bits);
        f(static_cast<std::uint64_t>(word_begin + w) * 64 + static_cast<std::uint64_t>(b));
        bits &= bits - 1;
      }
    }
  }
  std::size_t size() const {
    if (!dense) return keys.size();
    std::size_t c = 0;
    for (std::uint64_t w : words) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  std::size_t bytes() const { return (dense ? words.size() : keys.size()) * sizeof(std::uint64_t); }
};

struct Box {
  std::vector<std::int64_t> ext;       // per dim, inclusive extent (values 0..ext)
  std::vector<std::uint64_t> stride;
  std::uint64_t volume = 1;

  void init(const std::vector<std::int64_t>& extents) {
    ext = extents;
    stride.assign(ext.size(), 1);
    volume = 1;
    for (std::size_t d = ext.size(); d-- > 0;) {
      stride[d] = volume;
      const auto span = static_cast<std::uint64_t>(ext[d] + 1);
      if (volume > std::numeric_limits<std::uint64_t>::max() / span) throw TooLarge("partial-sum box overflows 64-bit keys");
      volume *= span;
    }
  }
  std::uint64_t key(const Vec& rel) const {
    std::uint64_t k = 0;
    for (std::size_t d = 0; d < ext.size(); ++d) k += static_cast<std::uint64_t>(rel[d]) * stride[d];
    return k;
  }
  Vec decode(std::uint64_t key) const {
    Vec v(ext.size());
    for (std::size_t d = 0; d < ext.size(); ++d) v[d] = static_cast<std::int64_t>((key / stride[d]) % static_cast<std::uint64_t>(ext[d] + 1));
    return v;
  }
};

// Tabulated two-argument rounding mix over a ∈ [a_lo, a_hi], b ∈ [0, b_hi].
struct MixTable {
  std::int64_t a_lo = 0, a_hi = -1, b_hi = -1;
  std::vector<std::int32_t> v;

  void build(const LinearProjector& mix, std::int64_t lo, std::int64_t hi, std::int64_t bmax) {
    v.clear();
    a_lo = lo;
    a_hi = hi;
    b_hi = bmax;
    if (hi < lo || bmax < 0) return;
    const auto cells = static_cast<std::uint64_t>(hi - lo + 1) * static_cast<std::uint64_t>(bmax + 1);
    if (cells > (std::uint64_t{1} << 24)) {
      a_hi = a_lo - 1;
      return;
    }
    v.resize(static_cast<std::size_t>(cells));
    std::size_t at = 0;
    for (std::int64_t a = lo; a <= hi; ++a) {
      for (std::int64_t b = 0; b <= bmax; ++b) {
        const int args[2] = {static_cast<int>(a), static_cast<int>(b)};
        v[at++] = static_cast<std::int32_t>(mix(args));
      }
    }
  }
  bool covers(std::int64_t a, std::int64_t b) const { return a >= a_lo && a <= a_hi && b >= 0 && b <= b_hi; }
  std::int64_t at(std::int64_t a, std::int64_t b) const {
    return v[static_cast<std::size_t>((a - a_lo) * (b_hi + 1) + b)];
  }
};

constexpr std::uint64_t kDenseBits = std::uint64_t{1} << 27;

struct TupleHash {
  std::size_t operator()(const std::vector<std::uint32_t>& v) const noexcept {
    std::size_t h = 1469598103934665603ULL;
    for (std::uint32_t x : v) h = (h ^ x) * 1099511628211ULL;
    return h;
  }
};

bool test_bit(const std::vector<std::uint64_t>& bits, std::size_t i) { return (bits[i / 64] >> (i % 64)) & 1U; }
void set_bit(std::vector<std::uint64_t>& bits, std::size_t i) { bits[i / 64] |= std::uint64_t{1} << (i % 64); }

void set_range(std::vector<std::uint64_t>& bits, std::size_t a, std::size_t b) {  // inclusive
  std::size_t wa = a / 64, wb = b / 64;
  const std::uint64_t ma = ~std::uint64_t{0} << (a % 64);
  const std::uint64_t mb = ~std::uint64_t{0} >> (63 - b % 64);
  if (wa == wb) {
    bits[wa] |= ma & mb;
    return;
  }
  bits[wa] |= ma;
  for (std::size_t w = wa + 1; w < wb; ++w) bits[w] = ~std::uint64_t{0};
  bits[wb] |= mb;
}

bool any_in_range(const std::uint64_t* bits, std::size_t a, std::size_t b) {  // inclusive
  std::size_t wa = a / 64, wb = b / 64;
  const std::uint64_t ma = ~std::uint64_t{0} << (a % 64);
  const std::uint64_t mb = ~std::uint64_t{0} >> (63 - b % 64);
  if (wa == wb) return bits[wa] & ma & mb;
  if (bits[wa] & ma) return true;
  for (std::size_t w = wa + 1; w < wb; ++w) {
    if (bits[w]) return true;
  }
  return bits[wb] & mb;
}

std::int64_t floor_div64(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}
std::int64_t ceil_div64(std::int64_t a, std::int64_t b) { return -floor_div64(-a, b); }

Vec diff_of(const Vec& v) {
  Vec d(v.size());
  for (std::size_t b = 0; b < v.size(); ++b) d[b] = v[b] - v[0];
  return d;
}

// Intersection of {e : c * e >= r} with [lo, hi] for integer e.
void restrict(std::int64_t c, std::int64_t r, std::int64_t& lo, std::int64_t& hi) {
  if (c > 0) {
    lo = std::max(lo, ceil_div64(r, c));
  } else if (c < 0) {
    hi = std::min(hi, floor_div64(r, c));
  } else if (r > 0) {
    hi = lo - 1;
  }
}

// Children difference vectors (first coordinate dropped) of one chain
// result, with a row bitmap for m in {2, 3}.
struct DiffSet {
  std::vector<Vec> u;
  std::int64_t lo[2] = {0, 0}, hi[2] = {0, 0};
  std::size_t row_words = 0;
  std::vector<std::uint64_t> bits;

  void build(std::size_t dims) {
    if (u.empty() || dims == 0 || dims > 2) return;
    for (std::size_t t = 0; t < dims; ++t) {
      lo[t] = std::numeric_limits<std::int64_t>::max();
      hi[t] = std::numeric_limits<std::int64_t>::min();
      for (const Vec& x : u) {
        lo[t] = std::min(lo[t], x[t + 1]);
        hi[t] = std::max(hi[t], x[t + 1]);
      }
    }
    const std::size_t last = static_cast<std::size_t>(hi[dims - 1] - lo[dims - 1] + 1);
    const std::size_t rows = dims == 1 ? 1 : static_cast<std::size_t>(hi[0] - lo[0] + 1);
    row_words = (last + 63) / 64;
    if (rows * row_words > (std::size_t{1} << 22)) return;
    bits.assign(rows * row_words, 0);
    for (const Vec& x : u) {
      const std::size_t row = dims == 1 ? 0 : static_cast<std::size_t>(x[1] - lo[0]);
      set_bit(bits, row * row_words * 64 + static_cast<std::size_t>(x[dims] - lo[dims - 1]));
    }
  }
};

// Bitmap-only difference set from a flat buffer of `count` rows of `dims`
// coordinates. Returns false when the box is too large.
bool build_flat_diffs(DiffSet& ds, const std::int64_t* d, std::size_t count, std::size_t dims) {
  ds.u.clear();
  ds.bits.clear();
  if (count == 0) return true;
  for (std::size_t t = 0; t < dims; ++t) {
    ds.lo[t] = std::numeric_limits<std::int64_t>::max();
    ds.hi[t] = std::numeric_limits<std::int64_t>::min();
  }
  for (std::size_t r = 0; r < count; ++r) {
    for (std::size_t t = 0; t < dims; ++t) {
      ds.lo[t] = std::min(ds.lo[t], d[r * dims + t]);
      ds.hi[t] = std::max(ds.hi[t], d[r * dims + t]);
    }
  }
  const std::size_t last = static_cast<std::size_t>(ds.hi[dims - 1] - ds.lo[dims - 1] + 1);
  const std::size_t rows = dims == 1 ? 1 : static_cast<std::size_t>(ds.hi[0] - ds.lo[0] + 1);
  ds.row_words = (last + 63) / 64;
  if (rows * ds.row_words > (std::size_t{1} << 22)) return false;
  ds.bits.assign(rows * ds.row_words, 0);
  for (std::size_t r = 0; r < count; ++r) {
    const std::size_t row = dims == 1 ? 0 : static_cast<std::size_t>(d[r * dims] - ds.lo[0]);
    set_bit(ds.bits, row * ds.row_words * 64 + static_cast<std::size_t>(d[r * dims + dims - 1] - ds.lo[dims - 1]));
  }
  return true;
}

// For m in {2, 3}: decides, for every parent class with difference vector D,
// whether some children difference u puts u + D inside the best-response
// region {e : n.e - s e_a >= -B for all a} (e_0 = 0). Either paints the
// region shifted by every u over the box of class differences, or queries
// each class against the bitmap of u, whichever touches fewer rows.
struct DiffGrid {
  bool active = false;
  std::size_t dims = 0;
  std::int64_t lo[2] = {0, 0}, hi[2] = {0, 0};
  std::size_t width = 1;  // extent of the last dimension
  std::size_t volume = 0;
  std::vector<std::size_t> cell;
  std::vector<Vec> diffs;

  void init(const std::vector<Vec>& d) {
    diffs = d;
    dims = diffs.front().size() - 1;
    for (std::size_t t = 0; t < dims; ++t) {
      lo[t] = std::numeric_limits<std::int64_t>::max();
      hi[t] = std::numeric_limits<std::int64_t>::min();
      for (const Vec& x : diffs) {
        lo[t] = std::min(lo[t], x[t + 1]);
        hi[t] = std::max(hi[t], x[t + 1]);
      }
    }
    width = static_cast<std::size_t>(hi[dims - 1] - lo[dims - 1] + 1);
    volume = dims == 1 ? width : width * static_cast<std::size_t>(hi[0] - lo[0] + 1);
    if (volume > (std::size_t{1} << 22)) return;
    for (const Vec& x : diffs) cell.push_back(index(x[1], dims == 2 ? x[2] : 0));
    active = true;
  }

  std::size_t index(std::int64_t d1, std::int64_t d2) const {
    if (dims == 1) return static_cast<std::size_t>(d1 - lo[0]);
    return static_cast<std::size_t>(d1 - lo[0]) * width + static_cast<std::size_t>(d2 - lo[1]);
  }

  struct Region {
    std::size_t m = 0;
    std::int64_t coef[3][2] = {};  // coefficient of e_{t+1} in constraint a
    std::int64_t budget = 0;
    std::int64_t e1lo = 0, e1hi = 0;  // projection onto e1 (m = 3)

    // Interval of the last coordinate for a given e1 (ignored when m = 2).
    void last_interval(std::int64_t e1, std::int64_t& l, std::int64_t& h) const {
      const std::size_t t = m - 2;
      for (std::size_t a = 0; a < m && l <= h; ++a) {
        restrict(coef[a][t], -budget - (m == 3 ? coef[a][0] * e1 : 0), l, h);
      }
    }
  };

  Region region(std::span<const int> n, std::int64_t s, std::int64_t budget) const {
    Region r;
    r.m = dims + 1;
    r.budget = budget;
    for (std::size_t a = 0; a < r.m; ++a) {
      for (std::size_t t = 0; t < dims; ++t) r.coef[a][t] = n[t + 1] - (a == t + 1 ? s : 0);
    }
    r.e1lo = std::numeric_limits<std::int64_t>::min() / 4;
    r.e1hi = std::numeric_limits<std::int64_t>::max() / 4;
    if (dims == 2) {
      // Fourier-Motzkin elimination of e2 (a real relaxation, so a superset).
      for (std::size_t a = 0; a < r.m; ++a) {
        if (r.coef[a][1] == 0) restrict(r.coef[a][0], -budget, r.e1lo, r.e1hi);
        for (std::size_t b = 0; b < r.m; ++b) {
          if (r.coef[a][1] > 0 && r.coef[b][1] < 0) {
            const std::int64_t ka = -r.coef[b][1], kb = r.coef[a][1];
            restrict(ka * r.coef[a][0] + kb * r.coef[b][0], -(ka + kb) * budget, r.e1lo, r.e1hi);
          }
        }
      }
    }
    return r;
  }

  // Sets out[k] for every class k that passes.
  void evaluate(std::span<const int> n, std::int64_t s, std::int64_t budget, const DiffSet& us,
                std::vector<std::uint64_t>& paint, std::vector<char>& out) const {
    const Region r = region(n, s, budget);
    out.assign(diffs.size(), 0);
    if (!us.bits.empty() && diffs.size() < us.u.size()) {
      for (std::size_t k = 0; k < diffs.size(); ++k) out[k] = query(r, diffs[k], us);
      return;
    }
    paint.assign((volume + 63) / 64, 0);
    for (const Vec& u : us.u) {
      if (dims == 1) {
        std::int64_t l = lo[0] + u[1], h = hi[0] + u[1];
        r.last_interval(0, l, h);
        if (l <= h) set_range(paint, static_cast<std::size_t>(l - u[1] - lo[0]), static_cast<std::size_t>(h - u[1] - lo[0]));
        continue;
      }
      const std::int64_t r_lo = std::max(lo[0] + u[1], r.e1lo), r_hi = std::min(hi[0] + u[1], r.e1hi);
      for (std::int64_t e1 = r_lo; e1 <= r_hi; ++e1) {
        std::int64_t l = lo[1] + u[2], h = hi[1] + u[2];
        r.last_interval(e1, l, h);
        if (l > h) continue;
        const std::size_t row = static_cast<std::size_t>(e1 - u[1] - lo[0]) * width;
        set_range(paint, row + static_cast<std::size_t>(l - u[2] - lo[1]), row + static_cast<std::size_t>(h - u[2] - lo[1]));
      }
    }
    for (std::size_t k = 0; k < diffs.size(); ++k) out[k] = test_bit(paint, cell[k]);
  }

  bool query(const Region& r, const Vec& d, const DiffSet& us) const {
    if (dims == 1) {
      std::int64_t l = us.lo[0] + d[1], h = us.hi[0] + d[1];
      r.last_interval(0, l, h);
      return l <= h && any_in_range(us.bits.data(), static_cast<std::size_t>(l - d[1] - us.lo[0]),
                                    static_cast<std::size_t>(h - d[1] - us.lo[0]));
    }
    const std::int64_t r_lo = std::max(us.lo[0] + d[1], r.e1lo), r_hi = std::min(us.hi[0] + d[1], r.e1hi);
    for (std::int64_t e1 = r_lo; e1 <= r_hi; ++e1) {
      std::int64_t l = us.lo[1] + d[2], h = us.hi[1] + d[2];
      r.last_interval(e1, l, h);
      if (l > h) continue;
      const std::uint64_t* row = us.bits.data() + static_cast<std::size_t>(e1 - d[1] - us.lo[0]) * us.row_words;
      if (any_in_range(row, static_cast<std::size_t>(l - d[2] - us.lo[1]), static_cast<std::size_t>(h - d[2] - us.lo[1]))) {
        return true;
      }
    }
    return false;
  }
};

}  // namespace

struct PolymatrixTreeDP::Impl {
  struct Node {
    PlayerId id = 0;
    PlayerId parent = -1;
    int m = 1;
    int s = 1;
    bool isolated = false;
    std::vector<PlayerId> chain_children;  // children whose edge clique i owns, tree order
    std::vector<int> chain_cliques;
    std::vector<PlayerId> plain_children;  // children without such a clique
    int parent_clique = -1;                // i's clique with its parent
    std::unique_ptr<StrategySpace> space;

    std::vector<std::uint32_t> class_of_parent;  // indexed by parent strategy
    std::vector<Vec> class_vec;                  // empty vectors when there is no parent clique

    bool has_up = false;                         // parent owns a clique with i
    std::vector<std::uint32_t> up_id;            // per own strategy
    std::vector<Vec> up_vec;                     // parent's lattice indices
    Vec up_lo, up_hi;

    std::vector<std::vector<std::uint64_t>> feasible;  // [class][bit per strategy]
    std::vector<std::vector<std::uint32_t>> up_sets;   // [class] sorted ids
    std::vector<bool> any_feasible;                    // [class]

    std::int64_t budget = 0;
    bool trivial_br = false;  // no cliques: every strategy is a best response

    // Chain geometry.
    Box box;
    Vec cum_lo_total;                       // simple: sum of per-child lows
    std::vector<Vec> child_lo;              // simple: per chain child
    std::vector<std::vector<LinearProjector>> mix;  // refined: [l][coordinate unused] one projector per step
    std::int64_t s_prime = 0;
    LinearProjector final_mix;              // refined: parent step
    std::vector<MixTable> mix_table;        // refined: tabulated mix per step
    MixTable final_table;
    bool final_is_copy = false;             // refined: parent clique is the first clique
    bool collected = false;
  };

  GameDefinition game;
  StructureStats stats;
  RootedTree tree;
  DiscretizationPlan plan;
  SlackMode slack;
  Variant variant;
  std::vector<Node> nodes;
  bool collected = false;

  Impl(const GameDefinition& g, const RootedTree& t, const DiscretizationPlan& p, SlackMode sm)
      : game(g), stats(validate_game(g)), tree(t), plan(p), slack(sm), variant(p.variant) {
    if (!stats.polymatrix) throw NotPolymatrix();
    const int n = game.num_players();
    if (static_cast<int>(plan.players.size()) != n) throw PlanMismatch("plan covers a different number of players");
    if (static_cast<int>(tree.parent.size()) != n) throw NotTree("tree covers a different number of players");
    nodes.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) setup_node(i);
    for (int i = 0; i < n; ++i) setup_edges(i);
  }

  Node& node(PlayerId i) { return nodes[static_cast<std::size_t>(i)]; }
  const Node& node(PlayerId i) const { return nodes[static_cast<std::size_t>(i)]; }

  int clique_with(PlayerId owner, PlayerId other) const {
    for (int c : stats.cliques_of[static_cast<std::size_t>(owner)]) {
      if (game.cliques[static_cast<std::size_t>(c)].members[1] == other) return c;
    }
    return -1;
  }

  void setup_node(PlayerId i) {
    Node& nd = node(i);
    const auto ui = static_cast<std::size_t>(i);
    nd.id = i;
    nd.parent = tree.parent[ui];
    nd.m = game.actions[ui];
    nd.s = plan.at(i).grid.s;
    nd.space = std::make_unique<StrategySpace>(nd.m, nd.s);
    nd.isolated = nd.parent < 0 && tree.children[ui].empty();
    for (int c : stats.cliques_of[ui]) {
      const PlayerId j = game.cliques[static_cast<std::size_t>(c)].members[1];
      const bool is_parent = j == nd.parent;
      const auto& ch = tree.children[ui];
      const bool is_child = std::find(ch.begin(), ch.end(), j) != ch.end();
      if (!is_parent && !is_child) throw NotTree("clique of player " + std::to_string(i) + " with " + std::to_string(j) + " is not a tree edge");
    }
    for (PlayerId o : tree.children[ui]) {
      const int c = clique_with(i, o);
      if (c >= 0) {
        nd.chain_children.push_back(o);
        nd.chain_cliques.push_back(c);
      } else {
        nd.plain_children.push_back(o);
      }
    }
    if (nd.parent >= 0) nd.parent_clique = clique_with(i, nd.parent);
    std::vector<int> expected = nd.chain_cliques;
    if (nd.parent_clique >= 0) expected.push_back(nd.parent_clique);
    if (plan.at(i).clique_order != expected) {
      throw PlanMismatch("clique order of player " + std::to_string(i) + " must list child edges in tree order, parent edge last");
    }
    nd.trivial_br = expected.empty();
    nd.budget = best_response_budget(game, plan, i, slack);
    nd.s_prime = plan.at(i).lattice.hi_index;
  }

  // Projected contribution of clique c (owner o, other q) for every strategy
  // of q: result[p_q] is a vector over the owner's actions.
  std::vector<Vec> contributions(int c) const {
    const LocalClique& clique = game.cliques[static_cast<std::size_t>(c)];
    const PlayerId o = clique.owner, q = clique.members[1];
    const int mo = game.actions[static_cast<std::size_t>(o)];
    const int mq = game.actions[static_cast<std::size_t>(q)];
    const int sq = plan.at(q).grid.s;
    const PlayerPlan& po = plan.at(o);
    const CliqueStats cs = clique_stats(clique);
    std::vector<LinearProjector> rows;
    for (int a = 0; a < mo; ++a) {
      std::vector<Rational> w;
      for (int b = 0; b < mq; ++b) {
        const Rational& x = clique.payoffs[static_cast<std::size_t>(a * mq + b)];
        if (variant == Variant::simple) {
          w.push_back(x / (Rational(sq) * po.lattice.tau));
        } else if (cs.range == 0) {
          w.push_back(0);
        } else {
          w.push_back((x - cs.l) / cs.range * Rational(static_cast<long>(po.lattice.hi_index)) / Rational(sq));
        }
      }
      rows.emplace_back(w);
    }
    const StrategySpace& sp = *node(q).space;
    std::vector<Vec> out(sp.size(), Vec(static_cast<std::size_t>(mo)));
    for (std::size_t k = 0; k < sp.size(); ++k) {
      auto nums = sp.numerators(k);
      for (int a = 0; a < mo; ++a) out[k][static_cast<std::size_t>(a)] = rows[static_cast<std::size_t>(a)](nums);
    }
    return out;
  }

  // Distinct vectors with an id per entry, ids in first-seen order.
  static void dedupe(const std::vector<Vec>& all, std::vector<std::uint32_t>& id, std::vector<Vec>& uniq) {
    std::map<Vec, std::uint32_t> seen;
    id.resize(all.size());
    for (std::size_t k = 0; k < all.size(); ++k) {
      auto [it, fresh] = seen.emplace(all[k], static_cast<std::uint32_t>(uniq.size()));
      if (fresh) uniq.push_back(all[k]);
      id[k] = it->second;
    }
  }

  void setup_edges(PlayerId i) {
    Node& nd = node(i);
    if (nd.parent < 0) {
      nd.class_of_parent.assign(1, 0);
      nd.class_vec.assign(1, Vec{});
    } else if (nd.parent_clique < 0) {
      nd.class_of_parent.assign(node(nd.parent).space->size(), 0);
      nd.class_vec.assign(1, Vec{});
    } else {
      dedupe(contributions(nd.parent_clique), nd.class_of_parent, nd.class_vec);
    }
    if (nd.parent >= 0) {
      const int up = clique_with(nd.parent, i);
      if (up >= 0) {
        nd.has_up = true;
        dedupe(contributions(up), nd.up_id, nd.up_vec);
        const std::size_t mp = nd.up_vec.front().size();
        nd.up_lo.assign(mp, std::numeric_limits<std::int64_t>::max());
        nd.up_hi.assign(mp, std::numeric_limits<std::int64_t>::min());
        for (const Vec& v : nd.up_vec) {
          for (std::size_t d = 0; d < mp; ++d) {
            nd.up_lo[d] = std::min(nd.up_lo[d], v[d]);
            nd.up_hi[d] = std::max(nd.up_hi[d], v[d]);
          }
        }
      }
    }
  }

  void setup_chain(PlayerId i) {
    Node& nd = node(i);
    const auto m = static_cast<std::size_t>(nd.m);
    if (variant == Variant::simple) {
      nd.cum_lo_total.assign(m, 0);
      std::vector<std::int64_t> ext(m, 0);
      nd.child_lo.clear();
      for (PlayerId o : nd.chain_children) {
        const Node& ch = node(o);
        nd.child_lo.push_back(ch.up_lo);
        for (std::size_t d = 0; d < m; ++d) {
          nd.cum_lo_total[d] += ch.up_lo[d];
          ext[d] += ch.up_hi[d] - ch.up_lo[d];
        }
      }
      nd.box.init(ext);
    } else {
      nd.box.init(std::vector<std::int64_t>(m, nd.s_prime));
      // Range-weighted mixing, one projector per chain step (l >= 2).
      const auto& order = plan.at(i).clique_order;
      Rational cum = 0;
      nd.mix.assign(order.size(), {});
      for (std::size_t l = 0; l < order.size(); ++l) {
        const Rational r = clique_stats(game.cliques[static_cast<std::size_t>(order[l])]).range;
        const Rational before = cum;
        cum += r;
        if (l == 0) continue;
        std::vector<Rational> w = cum == 0 ? std::vector<Rational>{0, 0} : std::vector<Rational>{r / cum, before / cum};
        nd.mix[l].emplace_back(w);
      }
      nd.mix_table.assign(order.size(), {});
      for (std::size_t l = 1; l < nd.chain_children.size(); ++l) {
        const Node& ch = node(nd.chain_children[l]);
        if (ch.up_vec.empty()) continue;
        nd.mix_table[l].build(nd.mix[l].front(), *std::min_element(ch.up_lo.begin(), ch.up_lo.end()),
                              *std::max_element(ch.up_hi.begin(), ch.up_hi.end()), nd.s_prime);
      }
      if (nd.parent_clique >= 0) {
        const std::size_t last = order.size() - 1;
        nd.final_is_copy = last == 0;
        if (!nd.final_is_copy) {
          nd.final_mix = nd.mix[last].front();
          std::int64_t lo = std::numeric_limits<std::int64_t>::max(), hi = std::numeric_limits<std::int64_t>::min();
          for (const Vec& v : nd.class_vec) {
            for (std::int64_t x : v) {
              lo = std::min(lo, x);
              hi = std::max(hi, x);
            }
          }
          nd.final_table.build(nd.final_mix, lo, hi, nd.s_prime);
        }
      }
    }
  }

  std::int64_t mix_at(const Node& nd, std::size_t l, std::int64_t e, std::int64_t prev) const {
    const MixTable& tab = nd.mix_table[l];
    if (tab.covers(e, prev)) return tab.at(e, prev);
    const int args[2] = {static_cast<int>(e), static_cast<int>(prev)};
    return nd.mix[l].front()(args);
  }

  // Refined final sum into `out` (m entries).
  void final_into(const Node& nd, const std::int64_t* x, std::size_t cls, std::int64_t* out) const {
    const Vec& pv = nd.class_vec[cls];
    const std::size_t m = static_cast<std::size_t>(nd.m);
    if (pv.empty()) {
      std::copy(x, x + m, out);
    } else if (nd.final_is_copy) {
      std::copy(pv.begin(), pv.end(), out);
    } else {
      for (std::size_t d = 0; d < m; ++d) {
        if (nd.final_table.covers(pv[d], x[d])) {
          out[d] = nd.final_table.at(pv[d], x[d]);
        } else {
          const int args[2] = {static_cast<int>(pv[d]), static_cast<int>(x[d])};
          out[d] = nd.final_mix(args);
        }
      }
    }
  }

  bool best_response_at(const Node& nd, std::span<const int> n, const std::int64_t* S) const {
    const std::size_t m = n.size();
    std::int64_t lhs = 0;
    for (std::size_t b = 0; b < m; ++b) lhs += static_cast<std::int64_t>(n[b]) * S[b];
    for (std::size_t a = 0; a < m; ++a) {
      if (lhs < static_cast<std::int64_t>(nd.s) * S[a] - nd.budget) return false;
    }
    return true;
  }

  // Refined step l (0-based clique position): S_l from S_{l-1} and E_l.
  Vec refined_step(const Node& nd, std::size_t l, const Vec& prev, const Vec& e) const {
    if (l == 0) return e;
    Vec out(prev.size());
    const LinearProjector& mix = nd.mix[l].front();
    const MixTable& tab = nd.mix_table[l];
    for (std::size_t d = 0; d < prev.size(); ++d) {
      if (tab.covers(e[d], prev[d])) {
        out[d] = tab.at(e[d], prev[d]);
        continue;
      }
      const int args[2] = {static_cast<int>(e[d]), static_cast<int>(prev[d])};
      out[d] = mix(args);
    }
    return out;
  }

  // One chain layer transition. `cur` holds keys of S_{l-1}; `ids` are the
  // child's up-vector ids allowed at this step.
  KeySet chain_step(const Node& nd, std::size_t l, const KeySet& cur, const std::vector<std::uint32_t>& ids) const {
    const Node& ch = node(nd.chain_children[l]);
    KeySet next;
    if (variant == Variant::simple) {
      std::vector<std::uint64_t> shifts;
      shifts.reserve(ids.size());
      Vec rel(static_cast<std::size_t>(nd.m));
      for (std::uint32_t id : ids) {
        for (std::size_t d = 0; d < rel.size(); ++d) rel[d] = ch.up_vec[id][d] - ch.up_lo[d];
        shifts.push_back(nd.box.key(rel));
      }
      if (cur.dense) {
        const std::size_t total_words = static_cast<std::size_t>((nd.box.volume + 63) / 64);
        std::size_t lo_w = total_words, hi_w = 0;
        // Output window: [begin + min shift, end + max shift].
        const std::uint64_t min_shift = *std::min_element(shifts.begin(), shifts.end());
        const std::uint64_t max_shift = *std::max_element(shifts.begin(), shifts.end());
        lo_w = std::min<std::size_t>(total_words, cur.word_begin + static_cast<std::size_t>(min_shift / 64));
        hi_w = std::min<std::size_t>(total_words, cur.word_begin + cur.words.size() + static_cast<std::size_t>(max_shift / 64) + 1);
        next.dense = true;
        next.word_begin = lo_w;
        next.words.assign(hi_w - lo_w, 0);
        for (std::uint64_t sh : shifts) {
          const std::size_t q = static_cast<std::size_t>(sh / 64);
          const unsigned r = static_cast<unsigned>(sh % 64);
          for (std::size_t w = 0; w < cur.words.size(); ++w) {
            const std::uint64_t val = cur.words[w];
            if (!val) continue;
            const std::size_t target = cur.word_begin + w + q;
            if (target >= hi_w) break;
            next.words[target - lo_w] |= val << r;
            if (r && target + 1 < hi_w) next.words[target + 1 - lo_w] |= val >> (64 - r);
          }
        }
        // Trim the window.
        std::size_t a = 0, b = next.words.size();
        while (a < b && next.words[a] == 0) ++a;
        while (b > a && next.words[b - 1] == 0) --b;
        next.words = std::vector<std::uint64_t>(next.words.begin() + static_cast<std::ptrdiff_t>(a), next.words.begin() + static_cast<std::ptrdiff_t>(b));
        next.word_begin += a;
        return next;
      }
      next.keys.reserve(cur.keys.size() * shifts.size());
      for (std::uint64_t k : cur.keys) {
        for (std::uint64_t sh : shifts) next.keys.push_back(k + sh);
      }
    } else {
      const std::size_t m = nd.box.ext.size();
      std::vector<std::int64_t> prev(m);
      cur.for_each([&](std::uint64_t k) {
        for (std::size_t d = 0; d < m; ++d) {
          prev[d] = static_cast<std::int64_t>((k / nd.box.stride[d]) % static_cast<std::uint64_t>(nd.box.ext[d] + 1));
        }
        for (std::uint32_t id : ids) {
          const Vec& e = ch.up_vec[id];
          std::uint64_t key = 0;
          for (std::size_t d = 0; d < m; ++d) {
            key += static_cast<std::uint64_t>(l == 0 ? e[d] : mix_at(nd, l, e[d], prev[d])) * nd.box.stride[d];
          }
          next.keys.push_back(key);
        }
      });
    }
    std::sort(next.keys.begin(), next.keys.end());
    next.keys.erase(std::unique(next.keys.begin(), next.keys.end()), next.keys.end());
    return next;
  }

  KeySet chain_start(const Node& nd) const {
    KeySet start;
    if (variant == Variant::simple && nd.box.volume <= kDenseBits) {
      start.dense = true;
      start.word_begin = 0;
      start.words.assign(1, 1);
    } else {
      start.keys.push_back(0);
    }
    return start;
  }

  // Absolute S vector of a chain key after all child cliques.
  Vec absolute(const Node& nd, std::uint64_t key) const {
    Vec v = nd.box.decode(key);
    if (variant == Variant::simple) {
      for (std::size_t d = 0; d < v.size(); ++d) v[d] += nd.cum_lo_total[d];
    }
    return v;
  }

  Vec final_sum(const Node& nd, const Vec& children_sum, std::size_t cls) const {
    const Vec& pv = nd.class_vec[cls];
    if (pv.empty()) return children_sum;
    if (variant == Variant::simple) {
      Vec out = children_sum;
      for (std::size_t d = 0; d < out.size(); ++d) out[d] += pv[d];
      return out;
    }
    if (nd.final_is_copy) return pv;
    Vec out(pv.size());
    for (std::size_t d = 0; d < out.size(); ++d) {
      if (nd.final_table.covers(pv[d], children_sum[d])) {
        out[d] = nd.final_table.at(pv[d], children_sum[d]);
        continue;
      }
      const int args[2] = {static_cast<int>(pv[d]), static_cast<int>(children_sum[d])};
      out[d] = nd.final_mix(args);
    }
    return out;
  }

  bool best_response(const Node& nd, std::span<const int> n, const Vec& S) const {
    if (nd.trivial_br) return true;
    std::int64_t lhs = 0;
    for (std::size_t b = 0; b < S.size(); ++b) lhs += static_cast<std::int64_t>(n[b]) * S[b];
    for (std::size_t a = 0; a < S.size(); ++a) {
      if (lhs < static_cast<std::int64_t>(nd.s) * S[a] - nd.budget) return false;
    }
    return true;
  }

  // Child class tuple for p_i; false if some child has no feasible strategy.
  bool child_classes(const Node& nd, std::size_t p, std::vector<std::uint32_t>& tuple) const {
    tuple.clear();
    for (PlayerId o : nd.chain_children) {
      const Node& ch = node(o);
      const std::uint32_t cls = ch.class_of_parent[p];
      if (ch.up_sets[cls].empty()) return false;
      tuple.push_back(cls);
    }
    for (PlayerId o : nd.plain_children) {
      const Node& ch = node(o);
      if (!ch.any_feasible[ch.class_of_parent[p]]) return false;
    }
    return true;
  }

  KeySet children_set(const Node& nd, const std::vector<std::uint32_t>& tuple) const {
    KeySet cur = chain_start(nd);
    for (std::size_t l = 0; l < nd.chain_children.size(); ++l) {
      cur = chain_step(nd, l, cur, node(nd.chain_children[l]).up_sets[tuple[l]]);
      if (cur.empty()) break;
    }
    return cur;
  }

  // Refined variant. The final sum mixes the parent contribution in
  // nonlinearly, so the image set is built per (children tuple, class); the
  // best-response test itself only sees differences, so each image collapses
  // to a difference set and every strategy costs one region query.
  void collect_refined(Node& nd) {
    const std::size_t P = nd.space->size();
    const std::size_t K = nd.class_vec.size();
    const std::size_t m = static_cast<std::size_t>(nd.m);
    std::map<std::vector<std::uint32_t>, std::vector<std::uint32_t>> buckets;
    std::vector<std::uint32_t> tuple;
    for (std::size_t p = 0; p < P; ++p) {
      if (child_classes(nd, p, tuple)) buckets[tuple].push_back(static_cast<std::uint32_t>(p));
    }
    DiffGrid probe;
    probe.dims = m - 1;
    const bool regional = m == 2 || m == 3;
    const Vec origin(m, 0);
    std::vector<std::int64_t> y(m), diffs;
    DiffSet ds;
    // Buckets come in lexicographic order, so chain layers of a shared
    // prefix are reused.
    std::vector<KeySet> stack{chain_start(nd)};
    const std::vector<std::uint32_t>* last = nullptr;
    for (const auto& [tup, ps] : buckets) {
      std::size_t c = 0;
      if (last != nullptr) {
        while (c < tup.size() && c + 1 < stack.size() && (*last)[c] == tup[c]) ++c;
      }
      stack.resize(c + 1);
      for (std::size_t l = c; l < tup.size() && !stack.back().empty(); ++l) {
        stack.push_back(chain_step(nd, l, stack.back(), node(nd.chain_children[l]).up_sets[tup[l]]));
      }
      last = &tup;
      const KeySet& set = stack.back();
      if (stack.size() != tup.size() + 1 || set.empty()) continue;
      if (nd.trivial_br) {
        for (std::uint32_t p : ps) {
          for (std::size_t k = 0; k < K; ++k) set_bit(nd.feasible[k], p);
        }
        continue;
      }
      std::vector<std::int64_t> sums;
      set.for_each([&](std::uint64_t key) {
        for (std::size_t d = 0; d < m; ++d) {
          sums.push_back(static_cast<std::int64_t>((key / nd.box.stride[d]) % static_cast<std::uint64_t>(nd.box.ext[d] + 1)));
        }
      });
      const std::size_t X = sums.size() / m;
      diffs.resize(X * (m - 1));
      for (std::size_t k = 0; k < K; ++k) {
        bool scanned = ps.size() <= 2 || !regional;
        if (!scanned) {
          for (std::size_t r = 0; r < X; ++r) {
            final_into(nd, sums.data() + r * m, k, y.data());
            for (std::size_t d = 1; d < m; ++d) diffs[r * (m - 1) + d - 1] = y[d] - y[0];
          }
          scanned = !build_flat_diffs(ds, diffs.data(), X, m - 1);
        }
        if (scanned) {
          // Few strategies share this tuple: scan with early exit.
          for (std::uint32_t p : ps) {
            const auto n = nd.space->numerators(p);
            for (std::size_t r = 0; r < X; ++r) {
              final_into(nd, sums.data() + r * m, k, y.data());
              if (best_response_at(nd, n, y.data())) {
                set_bit(nd.feasible[k], p);
                break;
              }
            }
          }
          continue;
        }
        for (std::uint32_t p : ps) {
          const auto n = nd.space->numerators(p);
          if (probe.query(probe.region(n, nd.s, nd.budget), origin, ds)) set_bit(nd.feasible[k], p);
        }
      }
    }
  }

  void collect_node(PlayerId i) {
    Node& nd = node(i);
    setup_chain(i);
    const std::size_t P = nd.space->size();
    const std::size_t K = nd.class_vec.size();
    const std::size_t words = (P + 63) / 64;
    nd.feasible.assign(K, std::vector<std::uint64_t>(words, 0));

    // Simple variant: the best-response test is invariant under adding a
    // constant to every coordinate of S, so sums are kept as differences
    // d_b = S_b - S_0 and duplicates collapse.
    const bool simple = variant == Variant::simple;
    const std::size_t m = static_cast<std::size_t>(nd.m);
    std::vector<Vec> class_diff(K);
    for (std::size_t k = 0; k < K; ++k) class_diff[k] = nd.class_vec[k].empty() ? Vec(m, 0) : diff_of(nd.class_vec[k]);
    DiffGrid grid;
    if (simple && K > 4 && (m == 2 || m == 3)) grid.init(class_diff);

    if (!simple) {
      collect_refined(nd);
    } else {
      std::unordered_map<std::vector<std::uint32_t>, std::shared_ptr<DiffSet>, TupleHash> memo;
      std::size_t memo_entries = 0;
      std::vector<std::uint32_t> tuple;
      std::vector<std::uint64_t> paint;
      std::vector<char> hit;
      for (std::size_t p = 0; p < P; ++p) {
        if (!child_classes(nd, p, tuple)) continue;
        auto it = memo.find(tuple);
        if (it == memo.end()) {
          KeySet set = children_set(nd, tuple);
          auto entry = std::make_shared<DiffSet>();
          auto& vecs = entry->u;
          set.for_each([&](std::uint64_t k) { vecs.push_back(simple ? diff_of(absolute(nd, k)) : absolute(nd, k)); });
          if (simple) {
            std::sort(vecs.begin(), vecs.end());
            vecs.erase(std::unique(vecs.begin(), vecs.end()), vecs.end());
            if (grid.active) entry->build(m - 1);
          }
          memo_entries += vecs.size() + entry->bits.size();
          if (memo_entries > (std::size_t{1} << 24)) {
            memo.clear();
            memo_entries = vecs.size() + entry->bits.size();
          }
          it = memo.emplace(tuple, std::move(entry)).first;
        }
        const std::vector<Vec>& sums = it->second->u;
        if (sums.empty()) continue;
        const auto n = nd.space->numerators(p);
        if (nd.trivial_br) {
          for (std::size_t k = 0; k < K; ++k) set_bit(nd.feasible[k], p);
          continue;
        }
        if (grid.active) {
          grid.evaluate(n, nd.s, nd.budget, *it->second, paint, hit);
          for (std::size_t k = 0; k < K; ++k) {
            if (hit[k]) set_bit(nd.feasible[k], p);
          }
          continue;
        }
        Vec y(m);
        for (std::size_t k = 0; k < K; ++k) {
          for (const Vec& x : sums) {
            bool ok;
            if (simple) {
              for (std::size_t b = 0; b < m; ++b) y[b] = x[b] + class_diff[k][b];
              ok = best_response(nd, n, y);
            } else {
              ok = best_response(nd, n, final_sum(nd, x, k));
            }
            if (ok) {
              set_bit(nd.feasible[k], p);
              break;
            }
          }
        }
      }
    }

    nd.any_feasible.assign(K, false);
    nd.up_sets.assign(K, {});
    std::vector<std::uint32_t> mark(nd.has_up ? nd.up_vec.size() : 0, 0);
    for (std::size_t k = 0; k < K; ++k) {
      const auto& bits = nd.feasible[k];
      for (std::size_t w = 0; w < bits.size(); ++w) {
        std::uint64_t b = bits[w];
        while (b) {
          const std::size_t p = w * 64 + static_cast<std::size_t>(std::countr_zero(b));
          b &= b - 1;
          nd.any_feasible[k] = true;
          if (nd.has_up) {
            const std::uint32_t id = nd.up_id[p];
            if (mark[id] != k + 1) {
              mark[id] = static_cast<std::uint32_t>(k + 1);
              nd.up_sets[k].push_back(id);
            }
          }
        }
      }
      std::sort(nd.up_sets[k].begin(), nd.up_sets[k].end());
    }
    nd.collected = true;
  }

  void collect() {
    if (collected) return;
    for (auto it = tree.preorder.rbegin(); it != tree.preorder.rend(); ++it) collect_node(*it);
    collected = true;
  }

  void require_collected() const {
    if (!collected) throw Error("collect() must run before querying messages");
  }

  // All layers L_0..L_c of the chain for strategy p (tuple must be valid).
  std::vector<KeySet> layers(const Node& nd, const std::vector<std::uint32_t>& tuple) const {
    std::vector<KeySet> out;
    out.push_back(chain_start(nd));
    for (std::size_t l = 0; l < nd.chain_children.size(); ++l) {
      out.push_back(chain_step(nd, l, out.back(), node(nd.chain_children[l]).up_sets[tuple[l]]));
    }
    return out;
  }

  // Candidate predecessor keys of `key` in layer l given the child's vector.
  bool predecessor(const Node& nd, std::size_t l, std::uint64_t key, const Vec& up, const KeySet& prev,
                   std::uint64_t& out) const {
    if (variant == Variant::simple) {
      const Node& ch = node(nd.chain_children[l]);
      Vec rel = nd.box.decode(key);
      for (std::size_t d = 0; d < rel.size(); ++d) {
        rel[d] -= up[d] - ch.up_lo[d];
        if (rel[d] < 0) return false;
      }
      out = nd.box.key(rel);
      return prev.contains(out);
    }
    bool found = false;
    prev.for_each([&](std::uint64_t k) {
      if (found) return;
      if (nd.box.key(refined_step(nd, l, nd.box.decode(k), up)) == key) {
        found = true;
        out = k;
      }
    });
    return found;
  }

  // One pass over the previous layer against every distinct vector of the
  // child's feasible strategies.
  bool refined_predecessor(const Node& nd, std::size_t l, std::uint64_t key, const Node& ch,
                           const std::vector<std::uint64_t>& bits, const KeySet& prev, std::uint64_t& out,
                           std::size_t& q_out) const {
    std::map<std::uint32_t, std::size_t> rep;
    for (std::size_t q = 0; q < ch.space->size(); ++q) {
      if (test_bit(bits, q)) rep.emplace(ch.up_id[q], q);
    }
    const std::size_t m = nd.box.ext.size();
    std::vector<std::int64_t> pv(m);
    bool found = false;
    prev.for_each([&](std::uint64_t k) {
      if (found) return;
      for (std::size_t d = 0; d < m; ++d) {
        pv[d] = static_cast<std::int64_t>((k / nd.box.stride[d]) % static_cast<std::uint64_t>(nd.box.ext[d] + 1));
      }
      for (const auto& [id, q] : rep) {
        const Vec& e = ch.up_vec[id];
        std::uint64_t nk = 0;
        for (std::size_t d = 0; d < m; ++d) {
          nk += static_cast<std::uint64_t>(l == 0 ? e[d] : mix_at(nd, l, e[d], pv[d])) * nd.box.stride[d];
        }
        if (nk == key) {
          found = true;
          out = k;
          q_out = q;
          return;
        }
      }
    });
    return found;
  }

  // Assigns the subtree of i given its strategy and parent class.
  void assign_subtree(PlayerId i, std::size_t p, std::size_t cls, std::vector<std::size_t>& choice,
                      std::vector<Vec>& witness) const {
    const Node& nd = node(i);
    choice[static_cast<std::size_t>(i)] = p;
    std::vector<std::uint32_t> tuple;
    if (!child_classes(nd, p, tuple)) throw Error("assignment reached an infeasible strategy");
    const auto ls = layers(nd, tuple);
    auto n = nd.space->numerators(p);
    std::uint64_t key = 0;
    bool found = false;
    ls.back().for_each([&](std::uint64_t k) {
      if (found) return;
      const Vec S = final_sum(nd, absolute(nd, k), cls);
      if (best_response(nd, n, S)) {
        found = true;
        key = k;
        if (!nd.trivial_br) witness[static_cast<std::size_t>(i)] = S;
      }
    });
    if (!found) throw Error("no witness for a feasible strategy of player " + std::to_string(i));
    for (std::size_t l = nd.chain_children.size(); l-- > 0;) {
      const Node& ch = node(nd.chain_children[l]);
      const std::uint32_t ccls = tuple[l];
      const auto& bits = ch.feasible[ccls];
      bool got = false;
      if (variant == Variant::refined) {
        std::size_t q = 0;
        got = refined_predecessor(nd, l, key, ch, bits, ls[l], key, q);
        if (got) assign_subtree(ch.id, q, ccls, choice, witness);
      }
      for (std::size_t q = 0; q < ch.space->size() && !got; ++q) {
        if (!test_bit(bits, q)) continue;
        std::uint64_t prev_key = 0;
        if (predecessor(nd, l, key, ch.up_vec[ch.up_id[q]], ls[l], prev_key)) {
          got = true;
          key = prev_key;
          assign_subtree(ch.id, q, ccls, choice, witness);
        }
      }
      if (!got) throw Error("witness unwinding failed at player " + std::to_string(ch.id));
    }
    for (PlayerId o : nd.plain_children) {
      const Node& ch = node(o);
      const std::size_t ccls = ch.class_of_parent[p];
      for (std::size_t q = 0; q < ch.space->size(); ++q) {
        if (test_bit(ch.feasible[ccls], q)) {
          assign_subtree(o, q, ccls, choice, witness);
          break;
        }
      }
    }
  }

  EquilibriumProfile assign() const {
    require_collected();
    const int n = game.num_players();
    std::vector<std::size_t> choice(static_cast<std::size_t>(n), 0);
    std::vector<Vec> witness(static_cast<std::size_t>(n));
    for (PlayerId r : tree.preorder) {
      if (tree.parent[static_cast<std::size_t>(r)] >= 0) continue;
      const Node& nd = node(r);
      std::size_t p = nd.space->size();
      for (std::size_t q = 0; q < nd.space->size(); ++q) {
        if (test_bit(nd.feasible[0], q)) {
          p = q;
          break;
        }
      }
      if (p == nd.space->size()) {
        throw InfeasibleAtRoot("component rooted at player " + std::to_string(r) + ": all " +
                               std::to_string(nd.space->size()) + " grid strategies infeasible (s=" +
                               std::to_string(nd.s) + ")");
      }
      assign_subtree(r, p, 0, choice, witness);
    }
    EquilibriumProfile out;
    out.variant = variant;
    out.slack = slack;
    out.root = tree.root;
    out.epsilon = plan.epsilon;
    for (int i = 0; i < n; ++i) {
      const Node& nd = node(i);
      GridMixedStrategy g;
      g.player = i;
      if (nd.isolated) {
        g.denominator = nd.m;
        g.numerators.assign(static_cast<std::size_t>(nd.m), 1);
      } else {
        g.denominator = nd.s;
        auto nums = nd.space->numerators(choice[static_cast<std::size_t>(i)]);
        g.numerators.assign(nums.begin(), nums.end());
      }
      out.strategies.push_back(std::move(g));
      out.s.push_back(nd.s);
      out.s_prime.push_back(plan.at(i).lattice.intervals());
      out.witnesses.push_back(witness[static_cast<std::size_t>(i)]);
    }
    out.table_bytes = table_bytes();
    return out;
  }

  // Enumeration of every witness unwinding.
  using Partial = std::vector<std::int32_t>;  // strategy index per player, -1 outside the subtree

  std::vector<Partial> enumerate_subtree(PlayerId i, std::size_t cls, std::size_t p, std::uint64_t cap,
                                         std::map<std::tuple<PlayerId, std::size_t, std::size_t>, std::vector<Partial>>& memo) const {
    const auto key = std::make_tuple(i, cls, p);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const Node& nd = node(i);
    std::vector<Partial> result;
    std::vector<std::uint32_t> tuple;
    if (!child_classes(nd, p, tuple)) {
      memo[key] = result;
      return result;
    }
    auto n = nd.space->numerators(p);
    const std::size_t c = nd.chain_children.size();
    // Children strategy tuples along the chain.
    std::vector<std::size_t> pick(c, 0);
    std::vector<std::vector<std::size_t>> options(c);
    for (std::size_t l = 0; l < c; ++l) {
      const Node& ch = node(nd.chain_children[l]);
      for (std::size_t q = 0; q < ch.space->size(); ++q) {
        if (test_bit(ch.feasible[tuple[l]], q)) options[l].push_back(q);
      }
    }
    std::vector<std::vector<std::size_t>> good_tuples;
    std::vector<Vec> state(c + 1);
    state[0] = Vec(static_cast<std::size_t>(nd.m), 0);
    auto rec = [&](auto&& self, std::size_t l) -> void {
      if (l == c) {
        Vec total = state[c];
        if (variant == Variant::simple) {
          // state holds absolute sums already
        }
        if (best_response(nd, n, final_sum(nd, total, cls))) good_tuples.push_back(pick);
        return;
      }
      const Node& ch = node(nd.chain_children[l]);
      for (std::size_t q : options[l]) {
        pick[l] = q;
        const Vec& up = ch.up_vec[ch.up_id[q]];
        if (variant == Variant::simple) {
          state[l + 1] = state[l];
          for (std::size_t d = 0; d < up.size(); ++d) state[l + 1][d] += up[d];
        } else {
          state[l + 1] = refined_step(nd, l, state[l], up);
        }
        self(self, l + 1);
      }
    };
    rec(rec, 0);

    for (const auto& tup : good_tuples) {
      std::vector<Partial> acc{Partial(nodes.size(), -1)};
      acc.front()[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(p);
      auto extend = [&](PlayerId o, std::size_t ocls, const std::vector<std::size_t>& strategies) {
        std::vector<Partial> sub;
        for (std::size_t q : strategies) {
          auto part = enumerate_subtree(o, ocls, q, cap, memo);
          sub.insert(sub.end(), part.begin(), part.end());
        }
        std::vector<Partial> next;
        for (const Partial& a : acc) {
          for (const Partial& b : sub) {
            Partial merged = a;
            for (std::size_t k = 0; k < merged.size(); ++k) {
              if (b[k] >= 0) merged[k] = b[k];
            }
            next.push_back(std::move(merged));
            if (next.size() > cap) throw TooLarge("more than " + std::to_string(cap) + " feasible profiles");
          }
        }
        acc = std::move(next);
      };
      for (std::size_t l = 0; l < c; ++l) extend(nd.chain_children[l], tuple[l], {tup[l]});
      for (PlayerId o : nd.plain_children) {
        const Node& ch = node(o);
        const std::size_t ocls = ch.class_of_parent[p];
        std::vector<std::size_t> all;
        for (std::size_t q = 0; q < ch.space->size(); ++q) {
          if (test_bit(ch.feasible[ocls], q)) all.push_back(q);
        }
        extend(o, ocls, all);
      }
      result.insert(result.end(), acc.begin(), acc.end());
      if (result.size() > cap) throw TooLarge("more than " + std::to_string(cap) + " feasible profiles");
    }
    memo[key] = result;
    return result;
  }

  std::vector<GridProfile> enumerate_all(std::uint64_t cap) const {
    require_collected();
    std::map<std::tuple<PlayerId, std::size_t, std::size_t>, std::vector<Partial>> memo;
    std::vector<Partial> acc{Partial(nodes.size(), -1)};
    for (PlayerId r : tree.preorder) {
      if (tree.parent[static_cast<std::size_t>(r)] >= 0) continue;
      const Node& nd = node(r);
      std::vector<Partial> comp;
      for (std::size_t q = 0; q < nd.space->size(); ++q) {
        if (!test_bit(nd.feasible[0], q)) continue;
        auto part = enumerate_subtree(r, 0, q, cap, memo);
        comp.insert(comp.end(), part.begin(), part.end());
      }
      std::vector<Partial> next;
      for (const Partial& a : acc) {
        for (const Partial& b : comp) {
          Partial merged = a;
          for (std::size_t k = 0; k < merged.size(); ++k) {
            if (b[k] >= 0) merged[k] = b[k];
          }
          next.push_back(std::move(merged));
          if (next.size() > cap) throw TooLarge("more than " + std::to_string(cap) + " feasible profiles");
        }
      }
      acc = std::move(next);
    }
    std::vector<GridProfile> out;
    for (const Partial& part : acc) {
      GridProfile prof;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Node& nd = nodes[i];
        auto nums = nd.space->numerators(static_cast<std::size_t>(part[i]));
        prof.push_back({static_cast<PlayerId>(i), nd.s, std::vector<int>(nums.begin(), nums.end())});
      }
      out.push_back(std::move(prof));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  std::size_t table_bytes() const {
    std::size_t b = 0;
    for (const Node& nd : nodes) {
      for (const auto& row : nd.feasible) b += row.size() * sizeof(std::uint64_t);
      for (const auto& row : nd.up_sets) b += row.size() * sizeof(std::uint32_t);
      b += nd.class_of_parent.size() * sizeof(std::uint32_t) + nd.up_id.size() * sizeof(std::uint32_t);
      for (const Vec& v : nd.class_vec) b += v.size() * sizeof(std::int64_t);
      for (const Vec& v : nd.up_vec) b += v.size() * sizeof(std::int64_t);
    }
    return b;
  }
};

PolymatrixTreeDP::PolymatrixTreeDP(const GameDefinition& game, const RootedTree& tree, const DiscretizationPlan& plan,
                                   SlackMode slack)
    : impl_(std::make_unique<Impl>(game, tree, plan, slack)) {}
PolymatrixTreeDP::~PolymatrixTreeDP() = default;
PolymatrixTreeDP::PolymatrixTreeDP(PolymatrixTreeDP&&) noexcept = default;
PolymatrixTreeDP& PolymatrixTreeDP::operator=(PolymatrixTreeDP&&) noexcept = default;

void PolymatrixTreeDP::collect() { impl_->collect(); }
const StrategySpace& PolymatrixTreeDP::space(PlayerId i) const { return *impl_->node(i).space; }
std::size_t PolymatrixTreeDP::parent_classes(PlayerId i) const { return impl_->node(i).class_vec.size(); }
std::size_t PolymatrixTreeDP::parent_class_of(PlayerId i, std::size_t parent_strategy) const {
  return impl_->node(i).class_of_parent.at(parent_strategy);
}
bool PolymatrixTreeDP::feasible(PlayerId i, std::size_t parent_class, std::size_t strategy) const {
  impl_->require_collected();
  return test_bit(impl_->node(i).feasible.at(parent_class), strategy);
}
std::vector<std::vector<std::uint64_t>> PolymatrixTreeDP::message(PlayerId i) const {
  impl_->require_collected();
  return impl_->node(i).feasible;
}

std::vector<std::vector<std::int64_t>> PolymatrixTreeDP::reachable_partial_sums(PlayerId i, std::size_t strategy,
                                                                                 std::size_t prefix) const {
  impl_->require_collected();
  const auto& nd = impl_->node(i);
  std::vector<std::uint32_t> tuple;
  if (!impl_->child_classes(nd, strategy, tuple)) return {};
  prefix = std::min(prefix, nd.chain_children.size());
  KeySet cur = impl_->chain_start(nd);
  Vec lo(static_cast<std::size_t>(nd.m), 0);
  for (std::size_t l = 0; l < prefix; ++l) {
    cur = impl_->chain_step(nd, l, cur, impl_->node(nd.chain_children[l]).up_sets[tuple[l]]);
    if (impl_->variant == Variant::simple) {
      for (std::size_t d = 0; d < lo.size(); ++d) lo[d] += nd.child_lo[l][d];
    }
  }
  std::vector<std::vector<std::int64_t>> out;
  cur.for_each([&](std::uint64_t k) {
    Vec v = nd.box.decode(k);
    for (std::size_t d = 0; d < v.size(); ++d) v[d] += lo[d];
    out.push_back(std::move(v));
  });
  std::sort(out.begin(), out.end());
  return out;
}

EquilibriumProfile PolymatrixTreeDP::assign() const { return impl_->assign(); }
std::vector<GridProfile> PolymatrixTreeDP::enumerate_all(std::uint64_t cap) const { return impl_->enumerate_all(cap); }
std::size_t PolymatrixTreeDP::table_bytes() const { return impl_->table_bytes(); }

EquilibriumProfile solve_polymatrix_tree(const GameDefinition& game, const RootedTree& tree,
                                         const DiscretizationPlan& plan, const SolveOptions& options) {
  PolymatrixTreeDP dp(game, tree, plan, options.slack);
  dp.collect();
  EquilibriumProfile out = dp.assign();
  if (options.certify) {
    out.certificate = exact_regret(game, out.strategies, plan.epsilon);
    out.certified = out.certificate->all_pass;
    if (!out.certified && options.slack == SlackMode::proven) {
      throw Error("internal certification failed: max regret " + to_string(out.certificate->max_regret()) +
                  " exceeds epsilon " + to_string(plan.epsilon));
    }
  }
  return out;
}

}  // namespace gmhg
