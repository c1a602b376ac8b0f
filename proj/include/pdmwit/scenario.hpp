// Copyright 2026 The pdmwit Authors
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

/**
 * @file
 * Config-driven scenarios behind `pdmwit run`. A config is validated in full
 * (parse_scenario) before anything is computed (execute_scenario).
 */

#pragma once

#include <chrono>
#include <filesystem>
#include <sstream>
#include <variant>

#include "pdmwit/io.hpp"
#include "pdmwit/verify.hpp"

namespace pdmwit {

inline constexpr std::int64_t kConfigVersion = 1;

struct PdmSpec {
    DensityMatrix state;
    KrausChannel channel;
    std::vector<double> p_values;
    std::optional<BasisKind> basis;
};

struct WitnessSpec {
    DensityMatrix state;
    KrausChannel channel;
    WitnessPolicy policy = WitnessPolicy::negative_space;
    std::optional<Matrix> op;
    std::optional<BasisKind> basis;
};

struct ClassifySpec {
    KrausChannel channel;
    NcgdProbe probe;
    std::optional<RealVector> probs;
};

struct LgSpec {
    KrausChannel channel;
    std::optional<KrausChannel> channel23;
    std::vector<DensityMatrix> states;
    std::vector<Dichotomic> observables;
    std::optional<std::int64_t> shots;
    std::uint64_t seed = 0;
};

struct SimulateSpec {
    DensityMatrix state;
    KrausChannel channel;
    std::int64_t shots = 0;
    std::uint64_t seed = 0;
    std::optional<BasisKind> basis;
    bool record_wall_time = false;
};

struct SweepSpec {
    DensityMatrix state;
    std::string family;
    std::vector<double> values;
    std::vector<double> p_values;
};

struct VerifySpec {
    std::string suite = "all";
    std::int64_t trials = 200;
    std::uint64_t seed = VerifyOptions{}.seed;
};

struct Scenario {
    std::string kind;
    std::string name;
    std::variant<std::monostate, PdmSpec, WitnessSpec, ClassifySpec, LgSpec, SimulateSpec, SweepSpec, VerifySpec> spec;
};

namespace detail {

inline std::uint64_t parse_seed(const Json &j, const std::string &where) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
        throw ConfigError(where, "seed must be a nonnegative integer");
    }
    return j.get<std::uint64_t>();
}

inline std::vector<double> parse_p_values(Fields &f) {
    std::vector<double> ps{1.0, 2.0};
    if (const auto *j = f.optional("p_values")) {
        const RealVector v = parse_real_vector(*j, f.at("p_values"));
        ps.assign(v.data(), v.data() + v.size());
        for (double p : ps) {
            if (!(p >= 1.0) || !std::isfinite(p)) {
                throw ConfigError(f.at("p_values"), "every p must be a finite number >= 1");
            }
        }
    }
    return ps;
}

inline Index parse_dim(Fields &f) {
    if (const auto *j = f.optional("dim")) {
        const auto d = json_integer(*j, f.at("dim"));
        if (d < 1 || d > 64) {
            throw ConfigError(f.at("dim"), "dimension must lie in [1, 64]");
        }
        return d;
    }
    return 2;
}

inline void check_basis(const std::optional<BasisKind> &k, Index d1, Index d2, const std::string &where) {
    if (k) {
        at_field(where, [&] {
            (void)ObservableBasis(*k, d1);
            (void)ObservableBasis(*k, d2);
            return 0;
        });
    }
}

inline void check_process(const DensityMatrix &rho, const KrausChannel &ch, const std::string &where) {
    if (rho.dim() != ch.in_dim()) {
        throw ConfigError(where, "channel input dimension " + std::to_string(ch.in_dim()) +
                                     " does not match state dimension " + std::to_string(rho.dim()));
    }
}

inline std::vector<double> parse_grid(const Json &j, const std::string &where) {
    if (j.is_array()) {
        const RealVector v = parse_real_vector(j, where);
        return {v.data(), v.data() + v.size()};
    }
    Fields f(j, where);
    const double start = json_number(f.required("start"), f.at("start"));
    const double stop = json_number(f.required("stop"), f.at("stop"));
    const auto count = json_integer(f.required("count"), f.at("count"));
    f.finish();
    if (count < 1 || count > 100000) {
        throw ConfigError(f.at("count"), "count must lie in [1, 100000]");
    }
    std::vector<double> out;
    for (std::int64_t k = 0; k < count; ++k) {
        out.push_back(count == 1 ? start
                                 : start + (stop - start) * static_cast<double>(k) /
                                               static_cast<double>(count - 1));
    }
    return out;
}

/// Channel of a one-parameter sweep family.
inline KrausChannel family_channel(const std::string &family, double x, Index dim) {
    if (family == "amplitude_damping") {
        return channels::amplitude_damping(x);
    }
    if (family == "depolarizing") {
        return channels::depolarizing(x, dim);
    }
    if (family == "dephasing") {
        return mixture(channels::identity(dim), channels::dephase(dim), x);
    }
    if (family == "rotation_y") {
        Matrix u(2, 2);
        u << std::cos(x), -std::sin(x), std::sin(x), std::cos(x);
        return channels::unitary(u);
    }
    throw InvalidArgument("unknown sweep family '" + family + "'");
}

inline NcgdProbe parse_probe(const Json &j, const std::string &where, Index d) {
    Fields f(j, where);
    const std::string type = json_string(f.required("type"), f.at("type"));
    NcgdProbe probe;
    if (type == "surrogate") {
        probe = std::monostate{};
    } else if (type == "lindblad") {
        const Matrix h = parse_matrix(f.required("hamiltonian"), f.at("hamiltonian"));
        if (h.rows() != d || h.cols() != d) {
            throw ConfigError(f.at("hamiltonian"), "must be " + std::to_string(d) + " x " + std::to_string(d));
        }
        at_field(f.at("hamiltonian"), [&] { return HermitianMatrix(h, 1e-10); });
        std::vector<Matrix> jumps;
        if (const auto *js = f.optional("jumps")) {
            if (!js->is_array()) {
                throw ConfigError(f.at("jumps"), "expected a list of matrices");
            }
            for (std::size_t k = 0; k < js->size(); ++k) {
                const std::string w = f.at("jumps") + "[" + std::to_string(k) + "]";
                jumps.push_back(parse_matrix((*js)[k], w));
                if (jumps.back().rows() != d || jumps.back().cols() != d) {
                    throw ConfigError(w, "jump operator has the wrong shape");
                }
            }
        }
        probe = LiouvillianProbe{lindblad_generator(h, jumps)};
    } else if (type == "powers") {
        const auto n = json_integer(f.required("steps"), f.at("steps"));
        if (n < 2 || n > 64) {
            throw ConfigError(f.at("steps"), "steps must lie in [2, 64]");
        }
        // Empty placeholders; parse_scenario fills them with powers of the channel.
        probe = DiscreteFamilyProbe{std::vector<Matrix>(static_cast<std::size_t>(n))};
    } else if (type == "family") {
        const Json &list = f.required("channels");
        if (!list.is_array() || list.size() < 2) {
            throw ConfigError(f.at("channels"), "expected at least two channels L(1), L(2), ...");
        }
        DiscreteFamilyProbe fam;
        for (std::size_t k = 0; k < list.size(); ++k) {
            const std::string w = f.at("channels") + "[" + std::to_string(k) + "]";
            const auto ch = parse_channel(list[k], w, d);
            if (ch.in_dim() != d || ch.out_dim() != d) {
                throw ConfigError(w, "family member has the wrong dimension");
            }
            fam.steps.push_back(superoperator(ch));
        }
        probe = std::move(fam);
    } else {
        throw ConfigError(f.at("type"), "probe type must be surrogate, lindblad, powers or family");
    }
    f.finish();
    return probe;
}

} // namespace detail

/// Validates a parsed config. `seed_override` replaces any config seed.
[[nodiscard]] inline Scenario parse_scenario(const Json &cfg,
                                             std::optional<std::uint64_t> seed_override = std::nullopt) {
    Fields top(cfg, "");
    const Json &ver = top.required("version");
    if (!ver.is_number_integer() || ver.get<std::int64_t>() != kConfigVersion) {
        throw ConfigError("version", "unsupported config version (expected " + std::to_string(kConfigVersion) + ")");
    }
    Scenario s;
    s.kind = json_string(top.required("kind"), "kind");
    if (const auto *n = top.optional("name")) {
        s.name = json_string(*n, "name");
    }
    const Json *seed_field = top.optional("seed");
    const std::optional<std::uint64_t> seed_cfg =
        seed_field ? std::optional(detail::parse_seed(*seed_field, "seed")) : std::nullopt;
    const auto seed = [&] { return seed_override.value_or(seed_cfg.value_or(0)); };
    const Index dim = detail::parse_dim(top);
    const auto state = [&] { return parse_state(top.required("state"), "state", dim); };
    const auto channel = [&](Index d) { return parse_channel(top.required("channel"), "channel", d); };

    if (s.kind == "pdm") {
        PdmSpec p{state(), channels::identity(1), {}, {}};
        p.channel = channel(p.state.dim());
        detail::check_process(p.state, p.channel, "channel");
        p.p_values = detail::parse_p_values(top);
        p.basis = parse_basis(top.optional("basis"), "basis");
        detail::check_basis(p.basis, p.channel.in_dim(), p.channel.out_dim(), "basis");
        s.spec = std::move(p);
    } else if (s.kind == "witness") {
        WitnessSpec w{state(), channels::identity(1), WitnessPolicy::negative_space, {}, {}};
        w.channel = channel(w.state.dim());
        detail::check_process(w.state, w.channel, "channel");
        if (const auto *pol = top.optional("policy")) {
            const std::string name = json_string(*pol, "policy");
            if (name == "negative_space") {
                w.policy = WitnessPolicy::negative_space;
            } else if (name == "most_negative") {
                w.policy = WitnessPolicy::most_negative;
            } else if (name == "custom") {
                w.policy = WitnessPolicy::custom;
            } else {
                throw ConfigError("policy", "must be negative_space, most_negative or custom");
            }
        }
        const auto *op = top.optional("operator");
        if ((w.policy == WitnessPolicy::custom) != (op != nullptr)) {
            throw ConfigError("operator", "an operator is required for, and only allowed with, policy \"custom\"");
        }
        if (op) {
            w.op = parse_matrix(*op, "operator");
            const Index n = w.channel.in_dim() * w.channel.out_dim();
            if (w.op->rows() != n || w.op->cols() != n) {
                throw ConfigError("operator", "must be " + std::to_string(n) + " x " + std::to_string(n));
            }
        }
        w.basis = parse_basis(top.optional("basis"), "basis");
        detail::check_basis(w.basis, w.channel.in_dim(), w.channel.out_dim(), "basis");
        s.spec = std::move(w);
    } else if (s.kind == "classify") {
        ClassifySpec c{channel(dim), {}, {}};
        if (c.channel.in_dim() != c.channel.out_dim()) {
            throw ConfigError("channel", "classification needs equal input and output dimensions");
        }
        if (const auto *pr = top.optional("probe")) {
            c.probe = detail::parse_probe(*pr, "probe", c.channel.in_dim());
            if (auto *fam = std::get_if<DiscreteFamilyProbe>(&c.probe);
                fam && !fam->steps.empty() && fam->steps.front().size() == 0) {
                *fam = power_family(c.channel, fam->steps.size());
            }
        }
        if (const auto *pr = top.optional("probs")) {
            const RealVector p = parse_real_vector(*pr, "probs");
            if (p.size() != c.channel.in_dim()) {
                throw ConfigError("probs", "length must equal the channel dimension");
            }
            detail::at_field("probs", [&] {
                detail::check_probabilities(p);
                return 0;
            });
            c.probs = p;
        }
        s.spec = std::move(c);
    } else if (s.kind == "lg") {
        LgSpec l{channel(dim), std::nullopt, {}, {}, std::nullopt, 0};
        const Index d = l.channel.in_dim();
        if (l.channel.out_dim() != d) {
            throw ConfigError("channel", "LG legs need equal input and output dimensions");
        }
        if (const auto *c2 = top.optional("channel23")) {
            l.channel23 = parse_channel(*c2, "channel23", d);
            if (l.channel23->in_dim() != d || l.channel23->out_dim() != d) {
                throw ConfigError("channel23", "second leg must act on the same dimension");
            }
        }
        if (const auto *st = top.optional("states")) {
            if (!st->is_array() || st->empty()) {
                throw ConfigError("states", "expected a non-empty list of states");
            }
            for (std::size_t k = 0; k < st->size(); ++k) {
                const std::string w = "states[" + std::to_string(k) + "]";
                l.states.push_back(parse_state((*st)[k], w, d));
                if (l.states.back().dim() != d) {
                    throw ConfigError(w, "state dimension differs from the channel");
                }
            }
        } else {
            for (Index i = 0; i < d; ++i) {
                l.states.push_back(DensityMatrix::basis_state(d, i));
            }
            l.states.push_back(DensityMatrix::maximally_mixed(d));
        }
        if (const auto *obs = top.optional("observables")) {
            if (!obs->is_array() || obs->empty()) {
                throw ConfigError("observables", "expected a non-empty list of observables");
            }
            for (std::size_t k = 0; k < obs->size(); ++k) {
                const std::string w = "observables[" + std::to_string(k) + "]";
                l.observables.push_back(parse_dichotomic((*obs)[k], w));
                if (l.observables.back().dim() != d) {
                    throw ConfigError(w, "observable dimension differs from the channel");
                }
            }
        } else if (d == 2) {
            l.observables.emplace_back(PauliString{"Z"}.matrix());
        } else {
            throw ConfigError("observables", "required when the dimension is not 2");
        }
        if (const auto *sh = top.optional("shots")) {
            l.shots = json_integer(*sh, "shots");
            if (*l.shots <= 0) {
                throw ConfigError("shots", "must be positive");
            }
        }
        l.seed = seed();
        s.spec = std::move(l);
    } else if (s.kind == "simulate") {
        SimulateSpec m{state(), channels::identity(1), 0, 0, {}, false};
        m.channel = channel(m.state.dim());
        detail::check_process(m.state, m.channel, "channel");
        m.shots = json_integer(top.required("shots"), "shots");
        if (m.shots <= 0) {
            throw ConfigError("shots", "must be positive");
        }
        m.seed = seed();
        m.basis = parse_basis(top.optional("basis"), "basis");
        detail::check_basis(m.basis, m.channel.in_dim(), m.channel.out_dim(), "basis");
        if (const auto *wt = top.optional("record_wall_time")) {
            if (!wt->is_boolean()) {
                throw ConfigError("record_wall_time", "expected true or false");
            }
            m.record_wall_time = wt->get<bool>();
        }
        s.spec = std::move(m);
    } else if (s.kind == "sweep") {
        SweepSpec w{state(), json_string(top.required("family"), "family"), {}, {}};
        w.values = detail::parse_grid(top.required("parameter"), "parameter");
        w.p_values = detail::parse_p_values(top);
        for (double x : w.values) {
            const auto ch = detail::at_field("family", [&] { return detail::family_channel(w.family, x, w.state.dim()); });
            detail::check_process(w.state, ch, "family");
        }
        s.spec = std::move(w);
    } else if (s.kind == "verify") {
        VerifySpec v;
        if (const auto *su = top.optional("suite")) {
            v.suite = json_string(*su, "suite");
            const auto &names = verify_suite_names();
            if (std::find(names.begin(), names.end(), v.suite) == names.end()) {
                throw ConfigError("suite", "unknown suite '" + v.suite + "'");
            }
        }
        if (const auto *tr = top.optional("trials")) {
            v.trials = json_integer(*tr, "trials");
            if (v.trials < 1) {
                throw ConfigError("trials", "must be positive");
            }
        }
        v.seed = seed_override.value_or(seed_cfg.value_or(v.seed));
        s.spec = v;
    } else {
        throw ConfigError("kind", "unknown kind '" + s.kind +
                                      "' (expected pdm, witness, classify, lg, simulate, sweep or verify)");
    }
    top.finish();
    return s;
}

struct RunOutput {
    /// Written as <kind>.json / <kind>.csv.
    Json json;
    std::string csv;
    /// Human-readable summary for stdout.
    std::string summary;
    /// False when the scenario itself reports a failure (verify).
    bool ok = true;
};

namespace detail {

inline Json header(const Scenario &s) {
    Json j;
    j["version"] = kConfigVersion;
    j["kind"] = s.kind;
    j["name"] = s.name;
    return j;
}

inline std::string line(const char *f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

inline BasisKind basis_or_default(const std::optional<BasisKind> &b, Index d) {
    return b.value_or(default_basis_kind(d));
}

inline RunOutput run_pdm(const Scenario &s, const PdmSpec &p) {
    const Pdm r = pdm_closed_form(p.state, p.channel);
    const auto ed = eig_hermitian(r.hermitian());
    RunOutput out;
    out.json = header(s);
    out.json["dims"] = Json::array({r.d1(), r.d2()});
    out.json["matrix"] = matrix_json(r.matrix());
    out.json["eigenvalues"] = vector_json(ed.eigenvalues);
    out.json["spatially_incompatible"] = is_spatially_incompatible(r);
    Json si = Json::array();
    for (double pv : p.p_values) {
        si.push_back(si_report_json(si_measure(r, pv)));
    }
    out.json["si"] = std::move(si);
    const auto k1 = basis_or_default(p.basis, r.d1());
    const auto k2 = basis_or_default(p.basis, r.d2());
    out.json["basis"] = Json::array({to_string(k1), to_string(k2)});
    out.csv = correlator_csv(exact_correlators(r, k1, k2));
    out.summary = line("negativity (T_1) %.17g\n", si_measure(r, 1.0).value) +
                  line("min eigenvalue   %.17g\n", ed.eigenvalues(0));
    return out;
}

inline RunOutput run_witness(const Scenario &s, const WitnessSpec &w) {
    const Pdm r = pdm_closed_form(w.state, w.channel);
    const Witness wit = w.policy == WitnessPolicy::custom ? custom_witness(r, *w.op, w.basis)
                                                          : synthesize_witness(r, w.policy, w.basis);
    const double direct = witness_expectation(wit, r);
    const double from_table = evaluate_witness(wit, exact_correlators(r, wit.kind1, wit.kind2));
    RunOutput out;
    out.json = header(s);
    out.json["policy"] = w.policy == WitnessPolicy::custom      ? "custom"
                         : w.policy == WitnessPolicy::most_negative ? "most_negative"
                                                                    : "negative_space";
    out.json["expectation"] = direct;
    out.json["expectation_from_table"] = from_table;
    out.json["negativity"] = si_measure(r, 1.0).value;
    out.json["witness"] = witness_json(wit);
    out.csv = "label1,label2,coefficient\n";
    const ObservableBasis b1(wit.kind1, wit.d1);
    const ObservableBasis b2(wit.kind2, wit.d2);
    for (const auto &o1 : b1.observables()) {
        for (const auto &o2 : b2.observables()) {
            const double c = wit.coeffs.at({o1.label(), o2.label()});
            if (std::abs(c) > kCoefficientCutoff) {
                out.csv += o1.label() + "," + o2.label() + "," + format_double(c) + "\n";
            }
        }
    }
    out.summary = line("witness expectation <W>_t %.17g\n", direct) +
                  line("from correlator table     %.17g\n", from_table);
    return out;
}

inline RunOutput run_classify(const Scenario &s, const ClassifySpec &c) {
    const auto rep = classify_channel(c.channel, c.probe);
    RunOutput out;
    out.json = header(s);
    out.json["dim"] = c.channel.in_dim();
    out.json["classes"] = class_report_json(rep);
    out.csv = "class,holds,residual\n";
    std::string table = "class  holds  residual\n";
    const std::array<std::pair<const char *, bool>, 5> rows{{{"OI", rep.is_oi},
                                                             {"CE", rep.is_ce},
                                                             {"CI", rep.is_ci},
                                                             {"DI", rep.is_di},
                                                             {"NCGD", rep.is_ncgd}}};
    for (const auto &[name, holds] : rows) {
        const double res = rep.residuals.at(name);
        out.csv += std::string(name) + "," + (holds ? "true" : "false") + "," + format_double(res) + "\n";
        char buf[96];
        std::snprintf(buf, sizeof buf, "%-5s  %-5s  %.3e\n", name, holds ? "yes" : "no", res);
        table += buf;
    }
    table += "NCGD mode: " + rep.ncgd_mode + "\n";
    if (c.probs) {
        const auto bt = block_positivity_test(*c.probs, c.channel);
        Json b;
        b["probs"] = vector_json(*c.probs);
        b["compatible"] = bt.compatible;
        b["failing_pair"] = bt.failing_pair ? Json::array({bt.failing_pair->first, bt.failing_pair->second}) : Json();
        b["failure_kind"] = bt.failure_kind ? Json(to_string(*bt.failure_kind)) : Json();
        b["stage"] = bt.stage;
        out.json["block_test"] = std::move(b);
        table += std::string("block test: ") + (bt.compatible ? "compatible" : "incompatible");
        if (!bt.compatible) {
            table += " (" + to_string(*bt.failure_kind) + " at " + std::to_string(bt.failing_pair->first) +
                     "," + std::to_string(bt.failing_pair->second) + ", " + bt.stage + ")";
        }
        table += "\n";
    }
    out.summary = table;
    return out;
}

inline RunOutput run_lg(const Scenario &s, const LgSpec &l) {
    const KrausChannel &second = l.channel23 ? *l.channel23 : l.channel;
    RunOutput out;
    out.json = header(s);
    out.csv = "state,observable,c12,c23,c13,k\n";
    Json rows = Json::array();
    std::string table = "state  obs  K                     bound(K<=1)  T_1 of R(state, ch)\n";
    for (std::size_t i = 0; i < l.states.size(); ++i) {
        const double t1 = si_measure(pdm_closed_form(l.states[i], l.channel), 1.0).value;
        for (std::size_t q = 0; q < l.observables.size(); ++q) {
            const LgScenario sc{l.states[i], l.channel, second, l.observables[q]};
            const auto r = lg_evaluate(sc);
            Json row;
            row["state"] = i;
            row["observable"] = q;
            row["c12"] = r.c12;
            row["c23"] = r.c23;
            row["c13"] = r.c13;
            row["k"] = r.k;
            row["t1"] = t1;
            if (l.shots) {
                const auto e = lg_sample(sc, *l.shots, substream_seed(l.seed, i * l.observables.size() + q));
                Json m;
                m["shots"] = *l.shots;
                m["c12"] = e.result.c12;
                m["c23"] = e.result.c23;
                m["c13"] = e.result.c13;
                m["k"] = e.result.k;
                m["stderr_k"] = e.se_k;
                row["sampled"] = std::move(m);
            }
            rows.push_back(std::move(row));
            out.csv += std::to_string(i) + "," + std::to_string(q) + "," + format_double(r.c12) + "," +
                       format_double(r.c23) + "," + format_double(r.c13) + "," + format_double(r.k) + "\n";
            char buf[160];
            std::snprintf(buf, sizeof buf, "%-5zu  %-3zu  %-20.17g  %-11s  %.17g\n", i, q, r.k,
                          r.k <= 1.0 + 1e-9 ? "respected" : "VIOLATED", t1);
            table += buf;
        }
    }
    out.json["rows"] = std::move(rows);
    Json bounds = Json::array();
    for (const auto &q : l.observables) {
        const auto b = spatial_lg_bound(q, q, q);
        bounds.push_back(Json::object({{"max_k", b.max_k}, {"min_k", b.min_k}}));
    }
    out.json["spatial_bound"] = std::move(bounds);
    const auto cmp = lg_vs_si(l.channel, l.states, l.observables, l.channel23);
    Json summary;
    summary["lg_violated"] = cmp.lg_violated;
    summary["max_k"] = cmp.max_k;
    summary["si_detected"] = cmp.si_detected;
    summary["best_negativity"] = cmp.best_negativity;
    summary["best_state"] = cmp.best_state ? Json(*cmp.best_state) : Json();
    summary["witness"] = cmp.witness ? witness_json(*cmp.witness) : Json();
    out.json["comparison"] = std::move(summary);
    table += std::string("LG: ") + (cmp.lg_violated ? "violated" : "not violated") +
             line(" (max K %.17g)", cmp.max_k) + "   SI: " + (cmp.si_detected ? "detected" : "not detected") +
             line(" (best T_1 %.17g)\n", cmp.best_negativity);
    out.summary = table;
    return out;
}

inline RunOutput run_simulate(const Scenario &s, const SimulateSpec &m, unsigned threads) {
    const auto k1 = basis_or_default(m.basis, m.channel.in_dim());
    const auto k2 = basis_or_default(m.basis, m.channel.out_dim());
    const auto start = std::chrono::steady_clock::now();
    const auto table = sample_table(m.state, m.channel, k1, k2, m.shots, m.seed, threads);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const Pdm exact = pdm_closed_form(m.state, m.channel);
    const Pdm recon = pdm_from_correlators(table);
    RunOutput out;
    out.json = header(s);
    out.json["seed"] = m.seed;
    out.json["shots_per_pair"] = m.shots;
    out.json["rng"] = kRngAlgorithm;
    out.json["basis"] = Json::array({to_string(k1), to_string(k2)});
    out.json["reconstructed"] = matrix_json(recon.matrix());
    out.json["reconstructed_eigenvalues"] = vector_json(eig_hermitian(recon.hermitian()).eigenvalues);
    out.json["reconstructed_t1"] = si_measure(recon, 1.0).value;
    out.json["closed_form_t1"] = si_measure(exact, 1.0).value;
    out.json["frobenius_error"] = (recon.matrix() - exact.matrix()).norm();
    if (is_spatially_incompatible(exact)) {
        const auto w = synthesize_witness(exact, WitnessPolicy::negative_space, k1 == k2 ? std::optional(k1) : std::nullopt);
        if (w.kind1 == k1 && w.kind2 == k2) {
            const auto est = evaluate_witness_with_error(w, table);
            out.json["witness_estimate"] = Json::object({{"value", est.value}, {"stderr", est.std_error},
                                                         {"exact", witness_expectation(w, exact)}});
        }
    }
    if (m.record_wall_time) {
        out.json["wall_time_s"] = wall;
    }
    out.csv = correlator_csv(table, true);
    out.summary = line("reconstructed T_1 %.17g\n", si_measure(recon, 1.0).value) +
                  line("Frobenius error   %.17g\n", (recon.matrix() - exact.matrix()).norm());
    return out;
}

inline RunOutput run_sweep(const Scenario &s, const SweepSpec &w, unsigned threads) {
    struct Point {
        double min_eig = 0.0;
        std::vector<double> tp;
    };
    std::vector<Point> pts(w.values.size());
    const auto work = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t k = begin; k < pts.size(); k += stride) {
            const Pdm r = pdm_closed_form(w.state, family_channel(w.family, w.values[k], w.state.dim()));
            pts[k].min_eig = min_eigenvalue(r.hermitian());
            for (double p : w.p_values) {
                pts[k].tp.push_back(si_measure(r, p).value);
            }
        }
    };
    threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(pts.size())));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(work, t, threads);
        }
    }
    RunOutput out;
    out.json = header(s);
    out.json["family"] = w.family;
    out.csv = "parameter,metric,value\n";
    Json points = Json::array();
    std::size_t best = 0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        Json pt;
        pt["parameter"] = w.values[k];
        pt["min_eigenvalue"] = pts[k].min_eig;
        Json tp = Json::array();
        out.csv += format_double(w.values[k]) + ",min_eigenvalue," + format_double(pts[k].min_eig) + "\n";
        for (std::size_t i = 0; i < w.p_values.size(); ++i) {
            tp.push_back(Json::object({{"p", w.p_values[i]}, {"value", pts[k].tp[i]}}));
            out.csv += format_double(w.values[k]) + ",T_" + format_double(w.p_values[i]) + "," +
                       format_double(pts[k].tp[i]) + "\n";
        }
        pt["t_p"] = std::move(tp);
        points.push_back(std::move(pt));
        if (pts[k].min_eig < pts[best].min_eig) {
            best = k;
        }
    }
    out.json["points"] = std::move(points);
    out.summary = std::to_string(pts.size()) + " points; most negative eigenvalue " +
                  format_double(pts[best].min_eig) + " at parameter " + format_double(w.values[best]) + "\n";
    return out;
}

inline std::string verify_report(const std::vector<InvariantResult> &results) {
    std::string text;
    for (const auto &r : results) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s  [%s] %s (trials=%lld, failures=%lld)", r.passed() ? "PASS" : "FAIL",
                      r.suite.c_str(), r.name.c_str(), static_cast<long long>(r.trials),
                      static_cast<long long>(r.failures));
        text += buf;
        if (!r.passed()) {
            text += ": " + r.detail;
        }
        text += "\n";
    }
    return text;
}

inline RunOutput run_verify_scenario(const Scenario &s, const VerifySpec &v, unsigned threads) {
    const auto results = run_verify(v.suite, {v.seed, v.trials, threads, Fault::none});
    RunOutput out;
    out.json = header(s);
    out.json["suite"] = v.suite;
    out.json["seed"] = v.seed;
    Json rows = Json::array();
    out.csv = "suite,invariant,trials,failures,passed\n";
    for (const auto &r : results) {
        rows.push_back(Json::object({{"suite", r.suite}, {"invariant", r.name}, {"trials", r.trials},
                                     {"failures", r.failures}, {"passed", r.passed()}, {"detail", r.detail}}));
        out.csv += r.suite + ",\"" + r.name + "\"," + std::to_string(r.trials) + "," +
                   std::to_string(r.failures) + "," + (r.passed() ? "true" : "false") + "\n";
        out.ok = out.ok && r.passed();
    }
    out.json["results"] = std::move(rows);
    out.json["passed"] = out.ok;
    out.summary = verify_report(results);
    return out;
}

} // namespace detail

/// Computes a validated scenario; library errors here are numerical failures.
[[nodiscard]] inline RunOutput execute_scenario(const Scenario &s, unsigned threads = 1) {
    return std::visit(
        [&](const auto &spec) -> RunOutput {
            using T = std::decay_t<decltype(spec)>;
            if constexpr (std::is_same_v<T, PdmSpec>) {
                return detail::run_pdm(s, spec);
            } else if constexpr (std::is_same_v<T, WitnessSpec>) {
                return detail::run_witness(s, spec);
            } else if constexpr (std::is_same_v<T, ClassifySpec>) {
                return detail::run_classify(s, spec);
            } else if constexpr (std::is_same_v<T, LgSpec>) {
                return detail::run_lg(s, spec);
            } else if constexpr (std::is_same_v<T, SimulateSpec>) {
                return detail::run_simulate(s, spec, threads);
            } else if constexpr (std::is_same_v<T, SweepSpec>) {
                return detail::run_sweep(s, spec, threads);
            } else if constexpr (std::is_same_v<T, VerifySpec>) {
                return detail::run_verify_scenario(s, spec, threads);
            } else {
                throw InvalidArgument("execute_scenario: empty scenario");
            }
        },
        s.spec);
}

/// Writes <kind>.json and <kind>.csv into out_dir (created if needed).
inline void write_outputs(const std::filesystem::path &out_dir, const std::string &kind, const RunOutput &out) {
    std::filesystem::create_directories(out_dir);
    write_file_atomic(out_dir / (kind + ".json"), to_json_text(out.json));
    write_file_atomic(out_dir / (kind + ".csv"), out.csv);
}

} // namespace pdmwit
