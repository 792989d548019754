// Copyright 2026 The choiscope Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "choiscope/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "choiscope/bsa.hpp"
#include "choiscope/channels.hpp"
#include "choiscope/error.hpp"
#include "choiscope/io.hpp"
#include "choiscope/random.hpp"
#include "choiscope/reshape.hpp"

namespace choiscope {
namespace {

using nlohmann::json;

// Malformed input or command line: exit code 1.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Settings {
  double tol = 1e-9;
  std::uint64_t seed = 0;
  bool has_seed = false;
  std::string out_path;
  std::string format = "json";
  bool timing = false;
  std::size_t budget = 500;
  bool operation = false;
  Tolerance tolerance() const { return {tol, tol}; }
};

struct Loaded {
  std::string bytes;
  ChannelFile file;
};

Loaded load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  Loaded l;
  l.bytes = buf.str();
  try {
    l.file = parse_channel_file(l.bytes);
  } catch (const Error& e) {
    throw InputError(path + ": " + e.what());
  }
  return l;
}

Channel load_channel(const Loaded& l, const std::string& path) {
  if (l.file.kind == FileKind::kState) throw InputError(path + ": expected a channel file, found a state");
  try {
    return to_channel(l.file);
  } catch (const Error& e) {
    throw InputError(path + ": " + e.what());
  }
}

json report_header(const std::string& command, const Settings& s) {
  json r;
  r["kind"] = "report";
  r["schema_version"] = kReportSchemaVersion;
  r["command"] = command;
  r["tolerance"] = s.tol;
  return r;
}

void emit(const std::string& text, const Settings& s, std::ostream& out) {
  if (s.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(s.out_path, std::ios::binary | std::ios::trunc);
  if (!f || !(f << text) || !f.flush()) throw InputError("cannot write '" + s.out_path + "'");
}

void emit_json(const json& doc, const Settings& s, std::ostream& out) {
  emit(canonical_dump(doc) + "\n", s, out);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::size_t exact_sqrt(std::size_t n) {
  const auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  return r * r == n ? r : 0;
}

// ---- verbs ----

int cmd_inspect(const std::string& path, const Settings& s, std::ostream& out) {
  const Loaded l = load(path);
  json r = report_header("inspect", s);
  r["input_digest"] = fnv1a_hex(l.bytes);
  r["source_kind"] = std::string(to_string(l.file.kind));
  if (l.file.kind == FileKind::kState) {
    const ComplexMatrix& rho = l.file.data[0];
    const bool herm = is_hermitian(rho, s.tolerance());
    const double min_eig = herm ? eig_hermitian(rho, s.tolerance()).eigenvalues(0)
                                : std::numeric_limits<double>::quiet_NaN();
    const bool psd = herm && min_eig >= -s.tol;
    r["dims"] = {l.file.dim0, l.file.dim1};
    r["hermitian"] = herm;
    r["positive_semidefinite"] = psd;
    r["trace"] = rho.trace().real();
    if (herm) r["min_eigenvalue"] = min_eig;
    emit_json(r, s, out);
    return psd ? kExitOk : kExitValidation;
  }
  const Channel phi = load_channel(l, path);
  const ValidationReport v = validate(phi, s.tolerance());
  r["d_in"] = phi.d_in();
  r["d_out"] = phi.d_out();
  r["hermiticity_preserving"] = v.hermiticity_preserving;
  r["completely_positive"] = v.completely_positive;
  r["trace_preserving"] = v.trace_preserving;
  r["trace_nonincreasing"] = v.trace_nonincreasing;
  r["choi_trace"] = v.choi_trace;
  r["min_choi_eigenvalue"] = v.min_choi_eigenvalue;
  emit_json(r, s, out);
  return v.completely_positive ? kExitOk : kExitValidation;
}

FileKind parse_target(const std::string& t) {
  if (t == "kraus") return FileKind::kKraus;
  if (t == "liouville") return FileKind::kLiouville;
  if (t == "choi") return FileKind::kChoi;
  throw InputError("unknown target '" + t + "' (expected kraus, liouville or choi)");
}

int cmd_convert(const std::string& path, const std::string& target, const Settings& s,
                std::ostream& out) {
  const FileKind kind = parse_target(target);
  const Loaded l = load(path);
  const Channel phi = load_channel(l, path);
  emit(serialize_channel_file(channel_file(phi, kind, s.tolerance())), s, out);
  return kExitOk;
}

int cmd_bsa(const std::string& path, const Settings& s, std::ostream& out) {
  if (!s.has_seed) throw InputError("bsa requires --seed");
  const Loaded l = load(path);
  json r = report_header("bsa", s);
  r["input_digest"] = fnv1a_hex(l.bytes);
  r["budget"] = s.budget;
  r["seed"] = s.seed;
  const auto t0 = std::chrono::steady_clock::now();
  if (s.operation) {
    const Channel phi = load_channel(l, path);
    const std::size_t n = exact_sqrt(phi.d_in());
    if (phi.d_in() != phi.d_out() || n == 0) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "--operation needs a channel on an n^2-dimensional space, got " +
                      std::to_string(phi.d_in()) + " -> " + std::to_string(phi.d_out()));
    }
    const SeparabilityResult res = is_separable_operation(phi, n, s.budget, s.seed);
    r["mode"] = "operation";
    r["subsystem_dim"] = n;
    r["verdict"] = res.verdict == SeparabilityVerdict::kSeparable   ? "separable"
                   : res.verdict == SeparabilityVerdict::kEntangled ? "entangled"
                                                                    : "inconclusive";
    r["lambda_total"] = res.bsa.lambda;
    r["choi_trace"] = res.bsa.choi_trace;
    r["entangled_weight"] = res.entangled_weight;
    r["ent_relative_norm"] = res.ent_relative_norm;
    r["term_count"] = res.bsa.product_kraus.size();
    r["residual_min_eigenvalue"] = res.bsa.state.residual_min_eigenvalue;
    json terms = json::array();
    for (const auto& [a, b] : res.bsa.factors) {
      terms.push_back({{"a", matrix_to_json(a)}, {"b", matrix_to_json(b)}});
    }
    r["product_kraus"] = std::move(terms);
  } else {
    if (l.file.kind != FileKind::kState) {
      throw InputError(path + ": expected a state file (use --operation for channels)");
    }
    const DensityMatrix dm = DensityMatrix::make(l.file.data[0], s.tolerance());
    const double trace = dm.trace.real();
    if (!(trace > s.tol)) throw Error(ErrorKind::kNotAState, "state has zero trace");
    const BsaDecomposition dec =
        bsa_state(dm.matrix / trace, {l.file.dim0, l.file.dim1}, s.budget, s.seed);
    r["mode"] = "state";
    r["input_trace"] = trace;
    r["lambda_total"] = dec.lambda_total;
    r["term_count"] = dec.terms.size();
    r["residual_min_eigenvalue"] = dec.residual_min_eigenvalue;
    r["candidate_set_size"] = dec.candidate_set_size;
    r["rounds"] = dec.rounds;
    r["converged"] = dec.converged;
    json terms = json::array();
    for (const auto& t : dec.terms) {
      terms.push_back({{"weight", t.weight},
                       {"a", vector_to_json(t.vector.e)},
                       {"b", vector_to_json(t.vector.f)}});
    }
    r["terms"] = std::move(terms);
  }
  if (s.timing) r["wall_time_seconds"] = seconds_since(t0);
  emit_json(r, s, out);
  return kExitOk;
}

// "name" or "name(p)".
std::pair<std::string, std::optional<double>> split_name(const std::string& spec) {
  const auto open = spec.find('(');
  if (open == std::string::npos) return {spec, std::nullopt};
  if (spec.back() != ')') throw InputError("malformed generator '" + spec + "'");
  const std::string arg = spec.substr(open + 1, spec.size() - open - 2);
  std::size_t used = 0;
  double p = 0.0;
  try {
    p = std::stod(arg, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != arg.size() || arg.empty()) throw InputError("bad parameter in '" + spec + "'");
  return {spec.substr(0, open), p};
}

ComplexMatrix singlet_projector() {
  ComplexVector v = ComplexVector::Zero(4);
  v(1) = std::sqrt(0.5);
  v(2) = -std::sqrt(0.5);
  return outer(v, v);
}

int cmd_gen(const std::string& spec, std::size_t n, const Settings& s, std::ostream& out) {
  const auto [name, param] = split_name(spec);
  if (n == 0) throw InputError("dimension must be positive");
  const bool random = name == "random-cp" || name == "random-state" || name == "random-local-unitary";
  const bool takes_param = name == "depolarizing" || name == "werner";
  if (takes_param && !param) throw InputError(name + " needs a parameter, e.g. " + name + "(0.5)");
  if (!takes_param && param) throw InputError(name + " takes no parameter");
  if (random && !s.has_seed) throw InputError(name + " requires --seed");
  if ((name == "singlet" || name == "werner") && n != 2) {
    throw InputError(name + " is a two-qubit state; dimension must be 2");
  }
  Rng rng(s.seed);
  ChannelFile file;
  if (name == "identity") {
    file = channel_file(Channel::from_kraus(KrausSet::make({identity(n)})), FileKind::kKraus);
  } else if (name == "transpose") {
    file = channel_file(Channel::from_liouville(LiouvilleMatrix::make(swap_operator(n), n, n)),
                        FileKind::kLiouville);
  } else if (name == "depolarizing") {
    const double p = *param;
    if (!(p >= 0.0 && p <= 1.0)) throw InputError("depolarizing parameter must lie in [0, 1]");
    const ComplexVector vi = vectorize(identity(n));
    const ComplexMatrix l = (1.0 - p) * identity(n * n) + (p / static_cast<double>(n)) * outer(vi, vi);
    file = channel_file(Channel::from_liouville(LiouvilleMatrix::make(l, n, n)), FileKind::kChoi);
  } else if (name == "swap") {
    file = channel_file(Channel::from_kraus(KrausSet::make({swap_operator(n)})), FileKind::kKraus);
  } else if (name == "random-cp") {
    file = channel_file(random_channel(n, rng), FileKind::kKraus);
  } else if (name == "random-local-unitary") {
    const ComplexMatrix ua = haar_unitary(n, rng);
    const ComplexMatrix ub = haar_unitary(n, rng);
    file = channel_file(Channel::from_kraus(KrausSet::make({tensor(ua, ub)})), FileKind::kKraus);
  } else if (name == "random-state") {
    file = state_file(random_state(n * n, rng), n, n);
  } else if (name == "maximally-mixed") {
    file = state_file(identity(n * n) / static_cast<double>(n * n), n, n);
  } else if (name == "singlet") {
    file = state_file(singlet_projector(), 2, 2);
  } else if (name == "werner") {
    const double p = *param;
    if (!(p >= 0.0 && p <= 1.0)) throw InputError("werner parameter must lie in [0, 1]");
    file = state_file(p * singlet_projector() + (1.0 - p) * identity(4) / 4.0, 2, 2);
  } else {
    throw InputError("unknown generator '" + name + "'");
  }
  emit(serialize_channel_file(file), s, out);
  return kExitOk;
}

int cmd_binary(const std::string& verb, const std::string& first, const std::string& second,
               const Settings& s, std::ostream& out) {
  const Loaded la = load(first), lb = load(second);
  const Channel a = load_channel(la, first), b = load_channel(lb, second);
  const Channel c = verb == "compose" ? compose(a, b) : tensor_channels(a, b);
  emit(serialize_channel_file(channel_file(c, FileKind::kLiouville)), s, out);
  return kExitOk;
}

double default_tolerance() {
  const char* env = std::getenv("CHOISCOPE_TOL");
  if (!env || !*env) return 1e-9;
  std::size_t used = 0;
  double t = 0.0;
  try {
    t = std::stod(env, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != std::string(env).size() || !(t > 0.0)) {
    throw InputError(std::string("CHOISCOPE_TOL is not a positive number: '") + env + "'");
  }
  return t;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Settings s;
  try {
    s.tol = default_tolerance();
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }

  CLI::App app{"Quantum channel representations and best separable approximations", "choiscope"};
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--tol", s.tol, "Numerical tolerance (default 1e-9, or CHOISCOPE_TOL)")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", s.seed, "Seed for randomized commands");
  app.add_option("--out", s.out_path, "Write the result to this file instead of stdout");
  app.add_option("--format", s.format, "Output format")->check(CLI::IsMember({"json"}));
  app.add_flag("--timing", s.timing, "Include wall time in reports");

  std::string path, path2, target, gen_name;
  std::size_t gen_dim = 2;

  auto* inspect = app.add_subcommand("inspect", "Validate a channel or state file");
  inspect->add_option("file", path, "Input file")->required();
  auto* convert = app.add_subcommand("convert", "Rewrite a channel in another representation");
  convert->add_option("file", path, "Input file")->required();
  convert->add_option("target", target, "kraus, liouville or choi")->required();
  auto* bsa = app.add_subcommand("bsa", "Best separable approximation of a state or operation");
  bsa->add_option("file", path, "Input file")->required();
  bsa->add_option("--budget", s.budget, "Candidate product vectors per round")
      ->check(CLI::PositiveNumber);
  bsa->add_flag("--operation", s.operation, "Treat the input as a channel on an n^2 system");
  auto* gen = app.add_subcommand("gen", "Write a named or random fixture");
  gen->add_option("name", gen_name,
                  "identity, transpose, depolarizing(p), swap, random-cp, random-state, "
                  "random-local-unitary, singlet, maximally-mixed, werner(p)")
      ->required();
  gen->add_option("dim", gen_dim, "Dimension (subsystem dimension for states)");
  auto* comp = app.add_subcommand("compose", "first after second");
  comp->add_option("first", path, "Applied last")->required();
  comp->add_option("second", path2, "Applied first")->required();
  auto* tens = app.add_subcommand("tensor", "Tensor product of two channels");
  tens->add_option("first", path, "A factor")->required();
  tens->add_option("second", path2, "B factor")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }
  s.has_seed = app.get_option("--seed")->count() > 0;

  try {
    if (*inspect) return cmd_inspect(path, s, out);
    if (*convert) return cmd_convert(path, target, s, out);
    if (*bsa) return cmd_bsa(path, s, out);
    if (*gen) return cmd_gen(gen_name, gen_dim, s, out);
    if (*comp) return cmd_binary("compose", path, path2, s, out);
    if (*tens) return cmd_binary("tensor", path, path2, s, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NotCompletelyPositiveError& e) {
    err << "error: " << e.what() << " (min eigenvalue " << e.min_eigenvalue() << ")\n";
    return kExitValidation;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitInput;
}

}  // namespace choiscope
