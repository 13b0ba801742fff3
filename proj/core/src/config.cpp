#include "qwork/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numbers>
#include <sstream>

#include "qwork/errors.hpp"

namespace qwork {

namespace {

struct Entry {
  std::string value;
  int line = 0;
  mutable bool used = false;
};

using Section = std::map<std::string, Entry>;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::map<std::string, Section> parse_ini(const std::string& text) {
  std::map<std::string, Section> doc;
  std::istringstream in(text);
  std::string raw, section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("unterminated section header '" + line + "'", line_no);
      section = trim(line.substr(1, line.size() - 2));
      if (section != "protocol" && section != "run" && section != "output")
        throw ConfigError("unknown section '[" + section + "]'", line_no);
      doc[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected 'key = value', got '" + line + "'", line_no);
    if (section.empty())
      throw ConfigError("key outside any section: '" + line + "'", line_no);
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("empty key", line_no);
    auto [it, inserted] = doc[section].emplace(key, Entry{trim(line.substr(eq + 1)), line_no});
    if (!inserted)
      throw ConfigError("duplicate key '" + key + "' (first at line " +
                            std::to_string(it->second.line) + ")",
                        line_no);
  }
  return doc;
}

class Reader {
 public:
  explicit Reader(std::map<std::string, Section> doc) : doc_(std::move(doc)) {}

  const Entry* find(const std::string& section, const std::string& key) const {
    const auto sec = doc_.find(section);
    if (sec == doc_.end()) return nullptr;
    const auto it = sec->second.find(key);
    if (it == sec->second.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  const Entry& require(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (e == nullptr)
      throw ConfigError("missing required key '" + key + "' in [" + section + "]");
    return *e;
  }

  double real(const std::string& section, const std::string& key) const {
    const Entry& e = require(section, key);
    return parse_real(e.value, key, e.line);
  }

  std::optional<double> optional_real(const std::string& section,
                                      const std::string& key) const {
    const Entry* e = find(section, key);
    if (e == nullptr) return std::nullopt;
    return parse_real(e->value, key, e->line);
  }

  // Every key must have been consumed by a `find`; leftovers are unknown keys.
  void reject_unused() const {
    for (const auto& [section, entries] : doc_)
      for (const auto& [key, entry] : entries)
        if (!entry.used)
          throw ConfigError("unknown key '" + key + "' in [" + section + "]", entry.line);
  }

  static double parse_real(const std::string& value, const std::string& key, int line) {
    char* end = nullptr;
    const double x = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || trim(end)[0] != '\0' || !std::isfinite(x))
      throw ConfigError("key '" + key + "' expects a real number, got '" + value + "'", line);
    return x;
  }

  static std::vector<double> parse_reals(const std::string& value, const std::string& key,
                                         int line) {
    std::vector<double> out;
    std::istringstream in(value);
    std::string tok;
    while (in >> tok) {
      if (!tok.empty() && tok.back() == ',') tok.pop_back();
      if (tok.empty()) continue;
      out.push_back(parse_real(tok, key, line));
    }
    return out;
  }

 private:
  std::map<std::string, Section> doc_;
};

Matrix parse_matrix(const std::string& value, const std::string& key, int line) {
  const std::vector<double> nums = Reader::parse_reals(value, key, line);
  if (nums.empty() || nums.size() % 2 != 0)
    throw ConfigError("key '" + key + "' expects row-major re im pairs", line);
  const std::size_t pairs = nums.size() / 2;
  const int d = static_cast<int>(std::llround(std::sqrt(static_cast<double>(pairs))));
  if (d < 1 || static_cast<std::size_t>(d) * d != pairs)
    throw ConfigError("key '" + key + "' holds " + std::to_string(pairs) +
                          " complex entries, not a square matrix",
                      line);
  Matrix m(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) {
      const std::size_t k = 2 * (static_cast<std::size_t>(r) * d + c);
      m(r, c) = Complex(nums[k], nums[k + 1]);
    }
  return m;
}

HermitianOperator parse_hermitian(const std::string& value, const std::string& key, int line) {
  try {
    return HermitianOperator(parse_matrix(value, key, line));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("key '" + key + "': " + e.what(), line);
  }
}

int parse_positive_int(const Entry& e, const std::string& key) {
  const double x = Reader::parse_real(e.value, key, e.line);
  const int n = static_cast<int>(std::llround(x));
  if (n <= 0 || std::abs(x - n) > 0.0)
    throw ConfigError("key '" + key + "' expects a positive integer, got '" + e.value + "'",
                      e.line);
  return n;
}

Schedule parse_lambda(const Reader& r, double tau) {
  const Entry& kind = r.require("protocol", "lambda");
  if (kind.value == "linear" || kind.value == "cosine") {
    const double v0 = r.real("protocol", "lambda_start");
    const double v1 = r.real("protocol", "lambda_end");
    return kind.value == "linear" ? Schedule::linear(v0, v1, tau)
                                  : Schedule::cosine(v0, v1, tau);
  }
  if (kind.value == "sampled") {
    const Entry& te = r.require("protocol", "lambda_times");
    const Entry& ve = r.require("protocol", "lambda_values");
    const auto times = Reader::parse_reals(te.value, "lambda_times", te.line);
    const auto values = Reader::parse_reals(ve.value, "lambda_values", ve.line);
    try {
      Schedule s = Schedule::sampled(times, values);
      if (std::abs(s.duration() - tau) > 1e-9 * std::max(1.0, tau))
        throw ConfigError("lambda_times must end at tau", te.line);
      return s;
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(std::string("lambda samples: ") + e.what(), te.line);
    }
  }
  throw ConfigError("key 'lambda' expects linear, cosine or sampled, got '" + kind.value + "'",
                    kind.line);
}

ProtocolSpec parse_spec(const Reader& r, int steps) {
  const Entry& type = r.require("protocol", "type");
  ProtocolSpec spec;

  if (type.value == "qubit_drive") {
    QubitDriveSpec q;
    q.omega = r.real("protocol", "omega");
    q.g = r.real("protocol", "g");
    if (q.omega <= 0.0) throw ConfigError("key 'omega' must be > 0");
    if (q.g <= 0.0) throw ConfigError("key 'g' must be > 0");
    // Default duration puts each step at the pi/(2g) resonance spacing.
    spec.tau =
        r.optional_real("protocol", "tau").value_or(steps * std::numbers::pi / (2.0 * q.g));
    spec.variant = q;
  } else if (type.value == "linear_ramp") {
    spec.tau = r.real("protocol", "tau");
    const Entry& a = r.require("protocol", "A");
    const Entry& b = r.require("protocol", "B");
    spec.variant = LinearRampSpec{parse_hermitian(a.value, "A", a.line),
                                  parse_hermitian(b.value, "B", b.line),
                                  parse_lambda(r, spec.tau)};
  } else if (type.value == "fixed_basis") {
    FixedBasisSpec fb;
    spec.tau = r.real("protocol", "tau");
    const Entry& be = r.require("protocol", "basis");
    const Matrix basis = parse_matrix(be.value, "basis", be.line);
    if (max_norm(basis.adjoint() * basis - identity(static_cast<int>(basis.rows()))) >
        tol::unitarity)
      throw ConfigError("key 'basis' columns must be orthonormal", be.line);
    fb.basis = basis;
    const Entry& se = r.require("protocol", "e_start");
    const Entry& ee = r.require("protocol", "e_end");
    const auto e0 = Reader::parse_reals(se.value, "e_start", se.line);
    const auto e1 = Reader::parse_reals(ee.value, "e_end", ee.line);
    if (e0.size() != static_cast<std::size_t>(basis.rows()))
      throw ConfigError("key 'e_start' needs one energy per basis column", se.line);
    if (e1.size() != e0.size())
      throw ConfigError("key 'e_end' needs one energy per basis column", ee.line);
    for (std::size_t n = 0; n < e0.size(); ++n)
      fb.tracks.push_back(Schedule::linear(e0[n], e1[n], spec.tau));
    spec.variant = std::move(fb);
  } else if (type.value == "tabulated") {
    TabulatedSpec tb;
    spec.tau = r.real("protocol", "tau");
    for (int j = 0; j <= steps; ++j) {
      const std::string key = "H" + std::to_string(j);
      const Entry* e = r.find("protocol", key);
      if (e == nullptr)
        throw ConfigError("tabulated protocol with K = " + std::to_string(steps) +
                          " needs H0..H" + std::to_string(steps) + "; missing '" + key + "'");
      tb.hamiltonians.push_back(parse_hermitian(e->value, key, e->line));
    }
    spec.variant = std::move(tb);
  } else {
    throw ConfigError("key 'type' expects qubit_drive, linear_ramp, fixed_basis or tabulated, "
                      "got '" +
                          type.value + "'",
                      type.line);
  }
  return spec;
}

std::vector<DistributionOrigin> parse_selection(const Entry& e) {
  std::vector<DistributionOrigin> out;
  std::istringstream in(e.value);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    if (tok == "histories")
      out.push_back(DistributionOrigin::histories);
    else if (tok == "measured")
      out.push_back(DistributionOrigin::measured);
    else if (tok == "tpm")
      out.push_back(DistributionOrigin::tpm);
    else if (tok == "margenau_hill")
      out.push_back(DistributionOrigin::margenau_hill);
    else
      throw ConfigError("key 'distributions' does not know '" + tok + "'", e.line);
  }
  if (out.empty()) throw ConfigError("key 'distributions' selects nothing", e.line);
  return out;
}

}  // namespace

ParsedConfig parse_protocol_config(const std::string& text) {
  const Reader r(parse_ini(text));

  // Fail early with the full list when nothing usable is present.
  if (r.find("protocol", "type") == nullptr && r.find("run", "K") == nullptr)
    throw ConfigError(
        "missing required keys: 'type' in [protocol], 'K' in [run], and one of "
        "'beta'/'rho' in [run]");

  RunSettings run;
  run.steps = parse_positive_int(r.require("run", "K"), "K");

  const Entry* beta = r.find("run", "beta");
  const Entry* rho = r.find("run", "rho");
  if ((beta != nullptr) == (rho != nullptr))
    throw ConfigError("exactly one of 'beta' and 'rho' must be set in [run]");
  if (beta != nullptr) {
    run.beta = Reader::parse_real(beta->value, "beta", beta->line);
    if (*run.beta < 0.0 || !std::isfinite(*run.beta))
      throw ConfigError("key 'beta' must be >= 0", beta->line);
  } else {
    try {
      run.rho = DensityMatrix(parse_matrix(rho->value, "rho", rho->line));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(std::string("key 'rho': ") + e.what(), rho->line);
    }
  }

  if (const Entry* e = r.find("run", "bin_tol")) {
    run.bin_tol = Reader::parse_real(e->value, "bin_tol", e->line);
    if (run.bin_tol < 0.0) throw ConfigError("key 'bin_tol' must be >= 0", e->line);
  }
  if (const Entry* e = r.find("run", "enum_cap")) {
    const double x = Reader::parse_real(e->value, "enum_cap", e->line);
    if (x < 1.0 || x > 9e18 || x != std::floor(x))
      throw ConfigError("key 'enum_cap' expects a positive integer", e->line);
    run.enum_cap = static_cast<std::uint64_t>(x);
  }
  if (const Entry* e = r.find("run", "distributions")) run.selected = parse_selection(*e);
  if (const Entry* e = r.find("output", "csv_path")) run.csv_path = e->value;
  if (const Entry* e = r.find("output", "report_path")) run.report_path = e->value;

  ProtocolSpec spec = parse_spec(r, run.steps);
  r.reject_unused();

  try {
    validate(spec);
  } catch (const Error& e) {
    throw ConfigError(std::string("protocol validation: ") + e.what());
  }
  if (run.rho && run.rho->dim() != protocol_dim(spec))
    throw ConfigError("key 'rho' dimension does not match the protocol");

  return {std::move(spec), std::move(run)};
}

DensityMatrix initial_state(const DiscretizedProtocol& proto, const RunSettings& run) {
  if (run.rho) return *run.rho;
  if (!run.beta) throw ConfigError("run settings carry neither 'beta' nor 'rho'");
  return thermal_state(proto.initial_h(), *run.beta);
}

}  // namespace qwork
