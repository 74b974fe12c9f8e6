#include "nbfec/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "nbfec/errors.hpp"

namespace nbfec {
namespace {

bool is_power_of_two(size_t v) { return v > 0 && (v & (v - 1)) == 0; }

int log2_exact(size_t v) {
  int m = 0;
  while ((size_t{1} << m) < v) ++m;
  return m;
}

void normalize_energy(Constellation& c) {
  double e = 0.0;
  for (size_t i = 0; i < c.size(); ++i) e += c.priors[i] * std::norm(c.points[i]);
  if (e <= 0.0) throw FormatError(c.name + ": constellation has zero average energy");
  double s = 1.0 / std::sqrt(e);
  for (auto& p : c.points) p *= s;
}

void validate(Constellation& c) {
  size_t M = c.points.size();
  if (M < 2 || !is_power_of_two(M)) {
    throw FormatError(c.name + ": number of points must be a power of two >= 2");
  }
  c.m = log2_exact(M);

  std::set<uint16_t> seen_labels(c.labels.begin(), c.labels.end());
  if (seen_labels.size() != M) {
    throw FormatError(c.name + ": labels must be a bijection onto {0,1}^m");
  }
  for (size_t i = 0; i < M; ++i) {
    for (size_t j = i + 1; j < M; ++j) {
      if (c.points[i] == c.points[j]) {
        throw FormatError(c.name + ": duplicate constellation point");
      }
    }
  }
  double psum = 0.0;
  for (double p : c.priors) {
    if (!(p > 0.0)) throw FormatError(c.name + ": priors must be positive");
    psum += p;
  }
  if (std::abs(psum - 1.0) > 1e-9) {
    throw FormatError(c.name + ": priors must sum to 1");
  }

  normalize_energy(c);
}

const std::map<std::string, const char*>& builtin_specs() {
  // All built-ins are defined in the same text format as external files and
  // go through the same parser. Coordinates are pre-normalization.
  static const std::map<std::string, const char*> specs = {
      // 2x4 grid
      {"c1", R"(# rectangular 8-QAM, 2x4 grid
8 2
000 -3 -1
001 -1 -1
010  1 -1
011  3 -1
100 -3  1
101 -1  1
110  1  1
111  3  1
)"},
      // two-ring star: inner QPSK at radius 1, outer QPSK at radius 1+sqrt(3),
      // rings offset by 45 degrees
      {"c2", R"(# two-ring 4+4 star 8-QAM
8 2
000  0.7071067811865476  0.7071067811865476
001 -0.7071067811865476  0.7071067811865476
010 -0.7071067811865476 -0.7071067811865476
011  0.7071067811865476 -0.7071067811865476
100  2.7320508075688772  0
101  0                   2.7320508075688772
110 -2.7320508075688772  0
111  0                  -2.7320508075688772
)"},
      // circular
      {"c3", R"(# 8-PSK
8 2
000  1                   0
001  0.7071067811865476  0.7071067811865476
010  0                   1
011 -0.7071067811865476  0.7071067811865476
100 -1                   0
101 -0.7071067811865476 -0.7071067811865476
110  0                  -1
111  0.7071067811865476 -0.7071067811865476
)"},
      // 7-point ring plus a point at the origin
      {"c4", R"(# ring-7 plus center 8-QAM
8 2
000  0                   0
001  1                   0
010  0.6234898018587336  0.7818314824680298
011 -0.2225209339563144  0.9749279121818236
100 -0.9009688679024191  0.4338837391175581
101 -0.9009688679024191 -0.4338837391175581
110 -0.2225209339563144 -0.9749279121818236
111  0.6234898018587336 -0.7818314824680298
)"},
      {"qpsk", R"(# Gray-labeled QPSK
4 2
00  1  1
01 -1  1
11 -1 -1
10  1 -1
)"},
  };
  return specs;
}

std::string canonical_builtin_name(std::string name) {
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (name == "rect8") return "c1";
  if (name == "star8") return "c2";
  if (name == "8psk") return "c3";
  if (name == "ring7") return "c4";
  return name;
}

}  // namespace

Constellation load_constellation(std::istream& in, const std::string& name) {
  Constellation c;
  c.name = name;

  auto next_line = [&](std::string& line) -> bool {
    while (std::getline(in, line)) {
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r\n") != std::string::npos) return true;
    }
    return false;
  };

  std::string line;
  if (!next_line(line)) throw FormatError(name + ": empty constellation spec");
  size_t M = 0;
  int D = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> M >> D)) throw FormatError(name + ": bad header, expected 'M D'");
  }
  if (D != 2) {
    throw FormatError(name + ": only D=2 constellations are supported");
  }

  for (size_t i = 0; i < M; ++i) {
    if (!next_line(line)) {
      throw FormatError(name + ": expected " + std::to_string(M) + " points");
    }
    std::istringstream ss(line);
    std::string bits;
    double re = 0.0, im = 0.0;
    if (!(ss >> bits >> re >> im)) {
      throw FormatError(name + ": bad point line '" + line + "'");
    }
    double prior;
    bool have_prior = static_cast<bool>(ss >> prior);

    uint16_t label = 0;
    for (char b : bits) {
      if (b != '0' && b != '1') {
        throw FormatError(name + ": label '" + bits + "' is not a bit string");
      }
      label = static_cast<uint16_t>((label << 1) | (b - '0'));
    }
    if (bits.size() != static_cast<size_t>(log2_exact(M))) {
      throw FormatError(name + ": label '" + bits + "' must have log2(M) bits");
    }
    c.points.emplace_back(re, im);
    c.labels.push_back(label);
    c.priors.push_back(have_prior ? prior : 1.0 / static_cast<double>(M));
  }

  validate(c);
  return c;
}

Constellation load_constellation_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open constellation file: " + path);
  return load_constellation(in, std::filesystem::path(path).stem().string());
}

Constellation builtin_constellation(const std::string& name) {
  std::string key = canonical_builtin_name(name);
  const auto& specs = builtin_specs();
  auto it = specs.find(key);
  if (it == specs.end()) {
    throw ConfigError("unknown constellation '" + name +
                      "' (built-ins: c1 c2 c3 c4 rect8 star8 8psk ring7 qpsk)");
  }
  std::istringstream ss(it->second);
  return load_constellation(ss, key);
}

Constellation resolve_constellation(const std::string& spec) {
  if (std::filesystem::exists(spec)) return load_constellation_file(spec);
  return builtin_constellation(spec);
}

std::vector<std::complex<double>> map_symbols(std::span<const uint8_t> symbols,
                                              const Constellation& c) {
  std::vector<std::complex<double>> out(symbols.size());
  for (size_t i = 0; i < symbols.size(); ++i) {
    if (symbols[i] >= c.size()) {
      throw InputError("map_symbols: symbol index " + std::to_string(symbols[i]) +
                       " out of range for M=" + std::to_string(c.size()));
    }
    out[i] = c.points[symbols[i]];
  }
  return out;
}

}  // namespace nbfec
