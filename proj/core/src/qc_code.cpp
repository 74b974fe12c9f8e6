#include "nbfec/qc_code.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "nbfec/errors.hpp"
#include "nbfec/rng.hpp"

namespace nbfec {
namespace {

constexpr int kInf = 1 << 28;

struct BaseGraph {
  int mb = 0, nb = 0;
  std::vector<std::vector<int>> col_rows;  // rows adjacent to each column
  std::vector<std::vector<int>> row_cols;
};

// Progressive edge growth on the base graph: every column connects to the
// rows currently farthest from it, which keeps short base cycles rare
// before any circulant shifts are chosen. Round-robin passes keep row
// degrees balanced against the hard cap dc.
bool peg_base_graph(int mb, int nb, int dv, int dc, Rng& rng, BaseGraph& g) {
  g.mb = mb;
  g.nb = nb;
  g.col_rows.assign(nb, {});
  g.row_cols.assign(mb, {});
  std::vector<int> row_deg(mb, 0);

  std::vector<int> dist_row(mb), dist_col(nb);
  auto bfs_from_col = [&](int j) {
    std::fill(dist_row.begin(), dist_row.end(), kInf);
    std::fill(dist_col.begin(), dist_col.end(), kInf);
    dist_col[j] = 0;
    std::deque<int> cols{j};
    while (!cols.empty()) {
      int c = cols.front();
      cols.pop_front();
      for (int r : g.col_rows[c]) {
        if (dist_row[r] != kInf) continue;
        dist_row[r] = dist_col[c] + 1;
        for (int c2 : g.row_cols[r]) {
          if (dist_col[c2] == kInf) {
            dist_col[c2] = dist_row[r] + 1;
            cols.push_back(c2);
          }
        }
      }
    }
  };

  for (int pass = 0; pass < dv; ++pass) {
    for (int j = 0; j < nb; ++j) {
      bfs_from_col(j);
      int best_dist = -1, best_deg = kInf;
      std::vector<int> ties;
      for (int r = 0; r < mb; ++r) {
        if (row_deg[r] >= dc) continue;
        if (std::find(g.col_rows[j].begin(), g.col_rows[j].end(), r) !=
            g.col_rows[j].end()) {
          continue;
        }
        int d = dist_row[r];
        if (d > best_dist || (d == best_dist && row_deg[r] < best_deg)) {
          best_dist = d;
          best_deg = row_deg[r];
          ties.clear();
          ties.push_back(r);
        } else if (d == best_dist && row_deg[r] == best_deg) {
          ties.push_back(r);
        }
      }
      if (ties.empty()) return false;
      int r = ties[rng.below(static_cast<uint32_t>(ties.size()))];
      g.col_rows[j].push_back(r);
      g.row_cols[r].push_back(j);
      ++row_deg[r];
    }
  }
  return true;
}

struct ShiftTable {
  int mb = 0, nb = 0, q = 0;
  std::vector<int> shift;  // mb*nb, -1 when no edge / unassigned

  int& at(int i, int j) { return shift[i * nb + j]; }
  int at(int i, int j) const { return shift[i * nb + j]; }
};

// Collects the circulant shifts that would close a length-4 cycle through
// the unassigned edge (I, J).
void forbidden_shifts_4(const BaseGraph& g, const ShiftTable& t, int I, int J,
                        std::vector<char>& bad) {
  for (int J2 : g.row_cols[I]) {
    if (J2 == J || t.at(I, J2) < 0) continue;
    for (int I2 : g.col_rows[J]) {
      if (I2 == I || t.at(I2, J) < 0) continue;
      if (t.at(I2, J2) < 0) continue;
      int s = t.at(I, J2) - t.at(I2, J2) + t.at(I2, J);
      bad[((s % t.q) + t.q) % t.q] = 1;
    }
  }
}

// Same for length-6 cycles: paths J - I - J1 - I1 - J2 - I2 - J with all
// five other edges already assigned.
void forbidden_shifts_6(const BaseGraph& g, const ShiftTable& t, int I, int J,
                        std::vector<char>& bad) {
  for (int J1 : g.row_cols[I]) {
    if (J1 == J || t.at(I, J1) < 0) continue;
    for (int I1 : g.col_rows[J1]) {
      if (I1 == I || t.at(I1, J1) < 0) continue;
      for (int J2 : g.row_cols[I1]) {
        if (J2 == J1 || J2 == J || t.at(I1, J2) < 0) continue;
        for (int I2 : g.col_rows[J]) {
          if (I2 == I || I2 == I1 || t.at(I2, J) < 0) continue;
          if (t.at(I2, J2) < 0) continue;
          int s = t.at(I, J1) - t.at(I1, J1) + t.at(I1, J2) - t.at(I2, J2) +
                  t.at(I2, J);
          bad[((s % t.q) + t.q) % t.q] = 1;
        }
      }
    }
  }
}

bool base_has_4_cycle(const BaseGraph& g, const ShiftTable& t) {
  for (int j1 = 0; j1 < g.nb; ++j1) {
    for (int j2 = j1 + 1; j2 < g.nb; ++j2) {
      std::vector<int> shared;
      for (int r : g.col_rows[j1]) {
        if (std::find(g.col_rows[j2].begin(), g.col_rows[j2].end(), r) !=
            g.col_rows[j2].end()) {
          shared.push_back(r);
        }
      }
      for (size_t a = 0; a < shared.size(); ++a) {
        for (size_t b = a + 1; b < shared.size(); ++b) {
          int s = t.at(shared[a], j1) - t.at(shared[a], j2) +
                  t.at(shared[b], j2) - t.at(shared[b], j1);
          if (((s % t.q) + t.q) % t.q == 0) return true;
        }
      }
    }
  }
  return false;
}

bool base_has_6_cycle(const BaseGraph& g, const ShiftTable& t) {
  std::vector<char> bad(static_cast<size_t>(t.q), 0);
  for (int J = 0; J < g.nb; ++J) {
    for (int I : g.col_rows[J]) {
      std::fill(bad.begin(), bad.end(), 0);
      forbidden_shifts_6(g, t, I, J, bad);
      if (bad[static_cast<size_t>(t.at(I, J))]) return true;
    }
  }
  return false;
}

}  // namespace

QcCode build_code(const QcCodeParams& p) {
  if (p.dv < 2) throw ConfigError("build_code: dv must be >= 2");
  if (p.dc <= p.dv) throw ConfigError("build_code: need dc > dv");
  if (p.nb < p.dc) throw ConfigError("build_code: need nb >= dc");
  if (p.q < 2) throw ConfigError("build_code: circulant size must be >= 2");
  if ((p.nb * p.dv) % p.dc != 0) {
    throw ConfigError("build_code: nb*dv must be divisible by dc for a regular code");
  }
  int mb = p.nb * p.dv / p.dc;
  if (mb < p.dv) {
    throw ConfigError("build_code: base graph too flat, need nb*dv/dc >= dv");
  }

  QcCode code;
  code.gf = GfTables(p.m);
  code.m = p.m;
  code.dv = p.dv;
  code.dc = p.dc;
  code.nb = p.nb;
  code.mb = mb;
  code.q = p.q;
  code.n = static_cast<size_t>(p.nb) * p.q;
  code.rows = static_cast<size_t>(mb) * p.q;
  code.k_nominal = code.n - code.rows;
  code.shift_seed = p.shift_seed;
  code.coeff_seed = p.coeff_seed;

  // Base graph + shifts, retried with fresh randomness if the greedy pass
  // corners itself (rare at these sizes).
  BaseGraph g;
  ShiftTable shifts;
  bool six_free = false;
  bool done = false;
  for (uint64_t attempt = 0; attempt < 64 && !done; ++attempt) {
    Rng rng(derive_seed(p.shift_seed, 0x9e90 + attempt));
    if (!peg_base_graph(mb, p.nb, p.dv, p.dc, rng, g)) continue;

    shifts.mb = mb;
    shifts.nb = p.nb;
    shifts.q = p.q;
    shifts.shift.assign(static_cast<size_t>(mb) * p.nb, -1);

    std::vector<int> order(static_cast<size_t>(p.q));
    std::iota(order.begin(), order.end(), 0);
    std::vector<char> bad4(static_cast<size_t>(p.q)), bad6(static_cast<size_t>(p.q));

    six_free = true;
    bool ok = true;
    for (int j = 0; j < p.nb && ok; ++j) {
      for (int i : g.col_rows[j]) {
        for (int t = p.q - 1; t > 0; --t) {
          std::swap(order[t], order[rng.below(static_cast<uint32_t>(t + 1))]);
        }
        std::fill(bad4.begin(), bad4.end(), 0);
        std::fill(bad6.begin(), bad6.end(), 0);
        forbidden_shifts_4(g, shifts, i, j, bad4);
        forbidden_shifts_6(g, shifts, i, j, bad6);
        int pick = -1;
        for (int s : order) {
          if (!bad4[s] && !bad6[s]) {
            pick = s;
            break;
          }
        }
        if (pick < 0) {
          for (int s : order) {
            if (!bad4[s]) {
              pick = s;
              six_free = false;
              break;
            }
          }
        }
        if (pick < 0) {
          ok = false;
          break;
        }
        shifts.at(i, j) = pick;
      }
    }
    done = ok;
  }
  if (!done) {
    throw ConfigError("build_code: could not find a 4-cycle-free shift assignment");
  }
  if (base_has_4_cycle(g, shifts)) {
    throw ConfigError("build_code: internal error, shift table contains a 4-cycle");
  }
  code.girth_at_least = (six_free && !base_has_6_cycle(g, shifts)) ? 8 : 6;

  // Canonical column-major edge order; coefficient draws and preset files
  // both follow it.
  for (int j = 0; j < p.nb; ++j) {
    std::vector<int> rows_of_col = g.col_rows[j];
    std::sort(rows_of_col.begin(), rows_of_col.end());
    for (int i : rows_of_col) {
      code.edges.push_back({i, j, shifts.at(i, j)});
    }
  }
  code.row_edges.assign(mb, {});
  for (size_t e = 0; e < code.edges.size(); ++e) {
    code.row_edges[code.edges[e].row].push_back(static_cast<int>(e));
  }

  Rng crng(p.coeff_seed);
  code.coeff.resize(code.edges.size() * static_cast<size_t>(p.q));
  for (size_t i = 0; i < code.coeff.size(); ++i) {
    code.coeff[i] =
        static_cast<uint8_t>(1 + crng.below(code.gf.size() - 1));
  }

  // ---- encoder: LU of a nonsingular column subset ----
  const size_t rows = code.rows;
  const size_t n = code.n;
  const int q = p.q;
  std::vector<std::vector<int>> col_edges(p.nb);
  for (size_t e = 0; e < code.edges.size(); ++e) {
    col_edges[code.edges[e].col].push_back(static_cast<int>(e));
  }
  auto materialize = [&](size_t col, std::vector<uint8_t>& v,
                         const std::vector<uint32_t>& rowp) {
    std::fill(v.begin(), v.end(), 0);
    int J = static_cast<int>(col) / q, w = static_cast<int>(col) % q;
    thread_local std::vector<uint8_t> raw;
    raw.assign(rows, 0);
    for (int e : col_edges[J]) {
      int z = ((w - code.edges[e].shift) % q + q) % q;
      raw[static_cast<size_t>(code.edges[e].row) * q + z] =
          code.coeff[static_cast<size_t>(e) * q + z];
    }
    for (size_t r = 0; r < rows; ++r) v[r] = raw[rowp[r]];
  };

  QcCode::Encoder& enc = code.encoder;
  enc.lu.assign(rows * rows, 0);
  enc.row_perm.resize(rows);
  std::iota(enc.row_perm.begin(), enc.row_perm.end(), 0);
  enc.slot_col.resize(rows);
  enc.inv_diag.assign(rows, 0);

  std::vector<uint8_t> tmp(rows);
  for (size_t slot = 0; slot < rows; ++slot) {
    enc.slot_col[slot] = static_cast<uint32_t>(n - rows + slot);
    materialize(enc.slot_col[slot], tmp, enc.row_perm);
    std::copy(tmp.begin(), tmp.end(), enc.lu.begin() + slot * rows);
  }
  std::vector<uint32_t> pool(n - rows);
  std::iota(pool.begin(), pool.end(), 0);  // popped from the back

  auto forward_apply = [&](std::vector<uint8_t>& v, size_t upto) {
    for (size_t t = 0; t < upto; ++t) {
      uint8_t val = v[t];
      if (!val) continue;
      const uint8_t* mr = code.gf.mul_row(val);
      const uint8_t* ft = &enc.lu[t * rows];
      for (size_t r = t + 1; r < rows; ++r) v[r] ^= mr[ft[r]];
    }
  };

  size_t rank = 0;
  for (size_t step = 0; step < rows; ++step) {
    // pivot search: current slot, later slots, then fresh columns pulled
    // from the information side
    auto find_in_slot = [&](size_t slot) -> size_t {
      const uint8_t* cs = &enc.lu[slot * rows];
      for (size_t r = step; r < rows; ++r) {
        if (cs[r]) return r;
      }
      return rows;
    };
    size_t pr = find_in_slot(step);
    if (pr == rows) {
      for (size_t j = step + 1; j < rows && pr == rows; ++j) {
        size_t r = find_in_slot(j);
        if (r != rows) {
          std::swap_ranges(enc.lu.begin() + step * rows,
                           enc.lu.begin() + (step + 1) * rows,
                           enc.lu.begin() + j * rows);
          std::swap(enc.slot_col[step], enc.slot_col[j]);
          pr = r;
        }
      }
    }
    while (pr == rows && !pool.empty()) {
      uint32_t col = pool.back();
      pool.pop_back();
      materialize(col, tmp, enc.row_perm);
      forward_apply(tmp, step);
      for (size_t r = step; r < rows; ++r) {
        if (tmp[r]) {
          pr = r;
          break;
        }
      }
      if (pr != rows) {
        std::copy(tmp.begin(), tmp.end(), enc.lu.begin() + step * rows);
        enc.slot_col[step] = col;
      }
    }
    if (pr == rows) break;  // H is rank deficient; the rest become info

    if (pr != step) {
      for (size_t j = 0; j < rows; ++j) {
        std::swap(enc.lu[j * rows + step], enc.lu[j * rows + pr]);
      }
      std::swap(enc.row_perm[step], enc.row_perm[pr]);
    }
    uint8_t piv = enc.lu[step * rows + step];
    uint8_t ipiv = code.gf.inv(piv);
    enc.inv_diag[step] = ipiv;
    {
      uint8_t* cs = &enc.lu[step * rows];
      const uint8_t* mr = code.gf.mul_row(ipiv);
      for (size_t r = step + 1; r < rows; ++r) cs[r] = mr[cs[r]];
    }
    const uint8_t* fs = &enc.lu[step * rows];
    for (size_t j = step + 1; j < rows; ++j) {
      uint8_t* cj = &enc.lu[j * rows];
      uint8_t val = cj[step];
      if (!val) continue;
      const uint8_t* mr = code.gf.mul_row(val);
      for (size_t r = step + 1; r < rows; ++r) cj[r] ^= mr[fs[r]];
    }
    ++rank;
  }

  code.rank = rank;
  code.k_eff = n - rank;
  std::vector<char> is_pivot(n, 0);
  for (size_t s = 0; s < rank; ++s) is_pivot[enc.slot_col[s]] = 1;
  enc.info_cols.clear();
  enc.info_cols.reserve(code.k_eff);
  for (size_t c = 0; c < n; ++c) {
    if (!is_pivot[c]) enc.info_cols.push_back(static_cast<uint32_t>(c));
  }

  double rate = 1.0 - static_cast<double>(p.dv) / p.dc;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "r%.2f-m%d-dc%d-nb%d-q%d-s%llu-c%llu", rate,
                p.m, p.dc, p.nb, p.q,
                static_cast<unsigned long long>(p.shift_seed),
                static_cast<unsigned long long>(p.coeff_seed));
  code.id = buf;
  return code;
}

QcCode build_rate_preset(double rate, int q, uint64_t seed) {
  struct Preset {
    double rate;
    int dc, nb;
  };
  static const Preset presets[] = {
      {0.70, 10, 50}, {0.75, 12, 48}, {0.80, 15, 50},
      {0.85, 20, 60}, {0.90, 30, 50},
  };
  for (const auto& ps : presets) {
    if (std::abs(rate - ps.rate) < 1e-6) {
      QcCodeParams p;
      p.m = 3;
      p.dv = 3;
      p.dc = ps.dc;
      p.nb = ps.nb;
      p.q = q;
      p.shift_seed = seed;
      p.coeff_seed = seed;
      return build_code(p);
    }
  }
  throw ConfigError("no code preset for rate " + std::to_string(rate) +
                    " (available: 0.70 0.75 0.80 0.85 0.90)");
}

void save_code_preset(const QcCode& code, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write code preset: " + path);
  out << "# nbfec qc code preset\n";
  out << "m " << code.m << "\n";
  out << "dv " << code.dv << "\n";
  out << "dc " << code.dc << "\n";
  out << "nb " << code.nb << "\n";
  out << "q " << code.q << "\n";
  out << "shift_seed " << code.shift_seed << "\n";
  out << "coeff_seed " << code.coeff_seed << "\n";
  out << "edges " << code.edges.size() << "\n";
  for (const auto& e : code.edges) {
    out << e.row << " " << e.col << " " << e.shift << "\n";
  }
}

QcCode load_code_preset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open code preset: " + path);

  QcCodeParams p;
  size_t edge_count = 0;
  std::vector<QcCode::BaseEdge> edges;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "m") ss >> p.m;
    else if (key == "dv") ss >> p.dv;
    else if (key == "dc") ss >> p.dc;
    else if (key == "nb") ss >> p.nb;
    else if (key == "q") ss >> p.q;
    else if (key == "shift_seed") ss >> p.shift_seed;
    else if (key == "coeff_seed") ss >> p.coeff_seed;
    else if (key == "edges") {
      ss >> edge_count;
      break;
    } else {
      throw FormatError(path + ": unknown preset key '" + key + "'");
    }
    if (ss.fail()) throw FormatError(path + ": bad value for key '" + key + "'");
  }
  if (edge_count == 0) throw FormatError(path + ": preset lists no edges");
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    QcCode::BaseEdge e;
    std::istringstream ss(line);
    if (!(ss >> e.row >> e.col >> e.shift)) {
      throw FormatError(path + ": bad edge line '" + line + "'");
    }
    edges.push_back(e);
  }
  if (edges.size() != edge_count) {
    throw FormatError(path + ": expected " + std::to_string(edge_count) +
                      " edges, found " + std::to_string(edges.size()));
  }

  // Rebuild deterministically from the stored seeds, then confirm the
  // stored edge list matches what the construction produced.
  QcCode code = build_code(p);
  if (code.edges.size() != edges.size()) {
    throw FormatError(path + ": edge list does not match seeded construction");
  }
  for (size_t i = 0; i < edges.size(); ++i) {
    if (code.edges[i].row != edges[i].row || code.edges[i].col != edges[i].col ||
        code.edges[i].shift != edges[i].shift) {
      throw FormatError(path + ": edge list does not match seeded construction");
    }
  }
  return code;
}

QcCode resolve_code(const std::string& spec, int q, uint64_t seed) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(spec, ec)) return load_code_preset(spec);
  std::string s = spec;
  if (!s.empty() && (s[0] == 'r' || s[0] == 'R')) s.erase(0, 1);
  try {
    size_t pos = 0;
    double rate = std::stod(s, &pos);
    if (pos == s.size()) return build_rate_preset(rate, q, seed);
  } catch (const std::invalid_argument&) {
  } catch (const std::out_of_range&) {
  }
  throw ConfigError("cannot resolve code spec '" + spec +
                    "': not a preset file or a rate");
}

std::vector<uint8_t> syndrome(const QcCode& code, std::span<const uint8_t> cw) {
  if (cw.size() != code.n) throw InputError("syndrome: codeword length mismatch");
  std::vector<uint8_t> s(code.rows, 0);
  const int q = code.q;
  for (size_t e = 0; e < code.edges.size(); ++e) {
    const auto& be = code.edges[e];
    const uint8_t* cf = &code.coeff[e * q];
    const uint8_t* cwj = &cw[static_cast<size_t>(be.col) * q];
    uint8_t* sr = &s[static_cast<size_t>(be.row) * q];
    for (int z = 0; z < q; ++z) {
      int w = z + be.shift;
      if (w >= q) w -= q;
      uint8_t v = cwj[w];
      if (v) sr[z] ^= code.gf.mul_row(cf[z])[v];
    }
  }
  return s;
}

bool syndrome_zero(const QcCode& code, std::span<const uint8_t> cw) {
  auto s = syndrome(code, cw);
  return std::all_of(s.begin(), s.end(), [](uint8_t v) { return v == 0; });
}

std::vector<uint8_t> encode(const QcCode& code, std::span<const uint8_t> info) {
  const auto& enc = code.encoder;
  if (info.size() != code.k_eff) {
    throw InputError("encode: expected " + std::to_string(code.k_eff) +
                     " info symbols, got " + std::to_string(info.size()));
  }
  std::vector<uint8_t> cw(code.n, 0);
  for (size_t i = 0; i < info.size(); ++i) {
    if (info[i] >= code.gf.size()) throw InputError("encode: info symbol out of range");
    cw[enc.info_cols[i]] = info[i];
  }

  std::vector<uint8_t> s = syndrome(code, cw);
  const size_t rows = code.rows;
  std::vector<uint8_t> sp(rows);
  for (size_t r = 0; r < rows; ++r) sp[r] = s[enc.row_perm[r]];
  for (size_t t = 0; t < code.rank; ++t) {
    uint8_t val = sp[t];
    if (!val) continue;
    const uint8_t* mr = code.gf.mul_row(val);
    const uint8_t* ft = &enc.lu[t * rows];
    for (size_t r = t + 1; r < rows; ++r) sp[r] ^= mr[ft[r]];
  }
  for (size_t r = code.rank; r < rows; ++r) {
    if (sp[r]) {
      throw InputError("encode: inconsistent parity system (rank bookkeeping bug)");
    }
  }
  std::vector<uint8_t> x(code.rank, 0);
  for (size_t i = code.rank; i-- > 0;) {
    uint8_t acc = sp[i];
    for (size_t j = i + 1; j < code.rank; ++j) {
      if (x[j]) acc ^= code.gf.mul_row(enc.lu[j * rows + i])[x[j]];
    }
    x[i] = code.gf.mul_row(enc.inv_diag[i])[acc];
  }
  for (size_t i = 0; i < code.rank; ++i) cw[enc.slot_col[i]] = x[i];
  return cw;
}

}  // namespace nbfec
