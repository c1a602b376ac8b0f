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
 * Config literals and report serialization. Output is byte-stable: objects
 * keep insertion order and every double is printed with %.17g.
 */

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdmwit/coherence.hpp"
#include "pdmwit/leggettgarg.hpp"

namespace pdmwit {

using Json = nlohmann::ordered_json;

/// Malformed or inconsistent config; `where` is a field path or "line L, column C".
class ConfigError : public Error {
  public:
    ConfigError(const std::string &where, const std::string &what)
        : Error(where + ": " + what), where_(where) {}

    [[nodiscard]] const std::string &where() const noexcept { return where_; }

  private:
    std::string where_;
};

// ---------------------------------------------------------------------------
// Writing

[[nodiscard]] inline std::string format_double(double x) {
    if (!std::isfinite(x)) {
        return "null";
    }
    if (x == 0.0) {
        x = 0.0; // drop the sign of -0
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace detail {

inline void dump_json(const Json &j, std::string &out, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (j.type()) {
    case Json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (const auto &[k, v] : j.items()) {
            if (!first) {
                out += ",\n";
            }
            first = false;
            out += inner + Json(k).dump() + ": ";
            dump_json(v, out, indent + 1);
        }
        out += "\n" + pad + "}";
        return;
    }
    case Json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        // Scalars and [re, im] pairs stay on one line, so a matrix prints one row per line.
        const auto scalar_like = [](const Json &e) {
            return e.is_primitive() ||
                   (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number());
        };
        const bool flat = std::all_of(j.begin(), j.end(), scalar_like);
        out += flat ? "[" : "[\n";
        bool first = true;
        for (const auto &v : j) {
            if (!first) {
                out += flat ? ", " : ",\n";
            }
            first = false;
            if (!flat) {
                out += inner;
            }
            dump_json(v, out, indent + 1);
        }
        out += flat ? "]" : "\n" + pad + "]";
        return;
    }
    case Json::value_t::number_float:
        out += format_double(j.get<double>());
        return;
    default:
        out += j.dump();
        return;
    }
}

} // namespace detail

[[nodiscard]] inline std::string to_json_text(const Json &j) {
    std::string out;
    detail::dump_json(j, out, 0);
    out += "\n";
    return out;
}

/// Writes to a sibling temp file, then renames over the target.
inline void write_file_atomic(const std::filesystem::path &path, const std::string &content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) {
            throw Error("cannot open " + tmp.string() + " for writing");
        }
        f << content;
        f.flush();
        if (!f) {
            throw Error("write failed for " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

[[nodiscard]] inline Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

[[nodiscard]] inline Json matrix_json(const Matrix &m) {
    Json rows = Json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Index j = 0; j < m.cols(); ++j) {
            row.push_back(complex_json(m(i, j)));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

[[nodiscard]] inline Json vector_json(const RealVector &v) {
    Json a = Json::array();
    for (Index k = 0; k < v.size(); ++k) {
        a.push_back(v(k));
    }
    return a;
}

[[nodiscard]] inline Json si_report_json(const SiReport &r) {
    Json j;
    j["p"] = r.p;
    j["value"] = r.value;
    j["method"] = r.method;
    Json neg = Json::array();
    for (const auto &[lambda, v] : r.negative_eigenpairs) {
        Json e;
        e["eigenvalue"] = lambda;
        Json vec = Json::array();
        for (Index k = 0; k < v.size(); ++k) {
            vec.push_back(complex_json(v(k)));
        }
        e["eigenvector"] = std::move(vec);
        neg.push_back(std::move(e));
    }
    j["negative_eigenpairs"] = std::move(neg);
    j["minimizer"] = matrix_json(r.minimizer.matrix());
    return j;
}

[[nodiscard]] inline Json witness_json(const Witness &w) {
    Json j;
    j["dims"] = Json::array({w.d1, w.d2});
    j["basis"] = Json::array({to_string(w.kind1), to_string(w.kind2)});
    j["operator"] = matrix_json(w.mat.matrix());
    Json coeffs = Json::array();
    for (const auto &[key, c] : w.coeffs) {
        if (std::abs(c) > kCoefficientCutoff) {
            coeffs.push_back(Json::array({key.first, key.second, c}));
        }
    }
    j["coefficients"] = std::move(coeffs);
    return j;
}

[[nodiscard]] inline Json class_report_json(const CoherenceClassReport &r) {
    Json j;
    j["OI"] = r.is_oi;
    j["CE"] = r.is_ce;
    j["CI"] = r.is_ci;
    j["DI"] = r.is_di;
    j["NCGD"] = r.is_ncgd;
    j["ncgd_mode"] = r.ncgd_mode;
    Json res;
    for (const char *k : {"OI", "CE", "CI", "DI", "NCGD"}) {
        res[k] = r.residuals.at(k);
    }
    j["residuals"] = std::move(res);
    return j;
}

/// label1,label2,value,shots[,stderr] in basis-grid order.
[[nodiscard]] inline std::string correlator_csv(const CorrelatorTable &t, bool with_stderr = false) {
    std::string out = with_stderr ? "label1,label2,value,shots,stderr\n" : "label1,label2,value,shots\n";
    const auto b1 = t.basis1();
    const auto b2 = t.basis2();
    for (const auto &o1 : b1.observables()) {
        for (const auto &o2 : b2.observables()) {
            const LabelPair key{o1.label(), o2.label()};
            const auto it = t.entries.find(key);
            if (it == t.entries.end()) {
                continue;
            }
            const auto s = t.shots.find(key);
            out += key.first + "," + key.second + "," + format_double(it->second) + "," +
                   std::to_string(s == t.shots.end() ? 0 : s->second);
            if (with_stderr) {
                const auto e = t.stderrs.find(key);
                out += "," + format_double(e == t.stderrs.end() ? 0.0 : e->second);
            }
            out += "\n";
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reading

/// Parses JSON text; syntax errors report line and column.
[[nodiscard]] inline Json parse_config_text(const std::string &text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error &e) {
        std::size_t line = 1;
        std::size_t col = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t k = 0; k < stop; ++k) {
            if (text[k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col),
                          "JSON syntax error");
    }
}

/// Reads an object's fields by name; finish() rejects any field that was never read.
class Fields {
  public:
    Fields(const Json &obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) {
            throw ConfigError(path_, "expected an object");
        }
    }

    [[nodiscard]] std::string at(const std::string &key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    [[nodiscard]] bool has(const std::string &key) {
        seen_.insert(key);
        return obj_.contains(key);
    }

    [[nodiscard]] const Json &required(const std::string &key) {
        seen_.insert(key);
        if (!obj_.contains(key)) {
            throw ConfigError(at(key), "required field is missing");
        }
        return obj_.at(key);
    }

    [[nodiscard]] const Json *optional(const std::string &key) {
        seen_.insert(key);
        return obj_.contains(key) ? &obj_.at(key) : nullptr;
    }

    void finish() const {
        for (const auto &[k, v] : obj_.items()) {
            if (!seen_.contains(k)) {
                throw ConfigError(at(k), "unknown field");
            }
        }
    }

  private:
    const Json &obj_;
    std::string path_;
    std::set<std::string> seen_;
};

[[nodiscard]] inline double json_number(const Json &j, const std::string &where) {
    if (!j.is_number()) {
        throw ConfigError(where, "expected a number");
    }
    return j.get<double>();
}

[[nodiscard]] inline std::int64_t json_integer(const Json &j, const std::string &where) {
    if (!j.is_number_integer()) {
        throw ConfigError(where, "expected an integer");
    }
    return j.get<std::int64_t>();
}

[[nodiscard]] inline std::string json_string(const Json &j, const std::string &where) {
    if (!j.is_string()) {
        throw ConfigError(where, "expected a string");
    }
    return j.get<std::string>();
}

/// Number or [re, im].
[[nodiscard]] inline Complex parse_complex(const Json &j, const std::string &where) {
    if (j.is_number()) {
        return {j.get<double>(), 0.0};
    }
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        return {j[0].get<double>(), j[1].get<double>()};
    }
    throw ConfigError(where, "expected a number or a [re, im] pair");
}

/// Array of equal-length rows of complex entries.
[[nodiscard]] inline Matrix parse_matrix(const Json &j, const std::string &where) {
    if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty()) {
        throw ConfigError(where, "expected a non-empty array of rows");
    }
    const auto rows = static_cast<Index>(j.size());
    const auto cols = static_cast<Index>(j[0].size());
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        const auto &row = j[static_cast<std::size_t>(r)];
        const std::string rw = where + "[" + std::to_string(r) + "]";
        if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
            throw ConfigError(rw, "row length differs from the first row");
        }
        for (Index c = 0; c < cols; ++c) {
            m(r, c) = parse_complex(row[static_cast<std::size_t>(c)], rw + "[" + std::to_string(c) + "]");
        }
    }
    return m;
}

[[nodiscard]] inline Vector parse_vector(const Json &j, const std::string &where) {
    if (!j.is_array() || j.empty()) {
        throw ConfigError(where, "expected a non-empty array");
    }
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t k = 0; k < j.size(); ++k) {
        v(static_cast<Index>(k)) = parse_complex(j[k], where + "[" + std::to_string(k) + "]");
    }
    return v;
}

[[nodiscard]] inline RealVector parse_real_vector(const Json &j, const std::string &where) {
    if (!j.is_array() || j.empty()) {
        throw ConfigError(where, "expected a non-empty array of numbers");
    }
    RealVector v(static_cast<Index>(j.size()));
    for (std::size_t k = 0; k < j.size(); ++k) {
        v(static_cast<Index>(k)) = json_number(j[k], where + "[" + std::to_string(k) + "]");
    }
    return v;
}

namespace detail {

/// Runs a library constructor and reports its validation failure at `where`.
template <class F> auto at_field(const std::string &where, F &&f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError &) {
        throw;
    } catch (const Error &e) {
        throw ConfigError(where, e.what());
    }
}

/// "name(arg)" -> {name, arg}; plain "name" -> {name, ""}.
inline std::pair<std::string, std::string> split_call(const std::string &s) {
    const auto open = s.find('(');
    if (open == std::string::npos || s.back() != ')') {
        return {s, ""};
    }
    return {s.substr(0, open), s.substr(open + 1, s.size() - open - 2)};
}

inline double parse_arg(const std::string &arg, const std::string &where) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(arg, &used);
    } catch (const std::exception &) {
        used = 0;
    }
    if (used == 0 || used != arg.size()) {
        throw ConfigError(where, "cannot read numeric argument '" + arg + "'");
    }
    return v;
}

} // namespace detail

/**
 * State literal. Strings: "zero", "one", "plus", "minus", "maximally_mixed",
 * "basis(i)". Objects: {"name": "basis", "index", "dim"}, {"name": "pure",
 * "vector"}, {"name": "diagonal", "probs"}, {"name": "matrix", "matrix"},
 * {"name": "maximally_mixed", "dim"}. A bare array is a density matrix.
 */
[[nodiscard]] inline DensityMatrix parse_state(const Json &j, const std::string &where,
                                               Index default_dim = 2) {
    return detail::at_field(where, [&]() -> DensityMatrix {
        if (j.is_array()) {
            return DensityMatrix(parse_matrix(j, where));
        }
        if (j.is_string()) {
            const auto [name, arg] = detail::split_call(j.get<std::string>());
            const double s = 1.0 / std::sqrt(2.0);
            if (name == "zero" && arg.empty()) {
                return DensityMatrix::basis_state(2, 0);
            }
            if (name == "one" && arg.empty()) {
                return DensityMatrix::basis_state(2, 1);
            }
            if ((name == "plus" || name == "minus") && arg.empty()) {
                Vector v(2);
                v << s, name == "plus" ? s : -s;
                return DensityMatrix::pure(v);
            }
            if (name == "maximally_mixed" && arg.empty()) {
                return DensityMatrix::maximally_mixed(default_dim);
            }
            if (name == "basis" && !arg.empty()) {
                const double i = detail::parse_arg(arg, where);
                if (i < 0 || i >= static_cast<double>(default_dim) || i != std::floor(i)) {
                    throw ConfigError(where, "basis index out of range");
                }
                return DensityMatrix::basis_state(default_dim, static_cast<Index>(i));
            }
            throw ConfigError(where, "unknown state '" + j.get<std::string>() + "'");
        }
        Fields f(j, where);
        const std::string name = json_string(f.required("name"), f.at("name"));
        Index dim = default_dim;
        if (const auto *d = f.optional("dim")) {
            dim = json_integer(*d, f.at("dim"));
            if (dim < 1) {
                throw ConfigError(f.at("dim"), "dimension must be positive");
            }
        }
        DensityMatrix out = DensityMatrix::maximally_mixed(1);
        if (name == "basis") {
            const auto i = json_integer(f.required("index"), f.at("index"));
            if (i < 0 || i >= dim) {
                throw ConfigError(f.at("index"), "index out of range for dim " + std::to_string(dim));
            }
            out = DensityMatrix::basis_state(dim, i);
        } else if (name == "pure") {
            const Vector v = parse_vector(f.required("vector"), f.at("vector"));
            if (v.norm() == 0.0) {
                throw ConfigError(f.at("vector"), "zero vector");
            }
            out = DensityMatrix::pure(v / v.norm());
        } else if (name == "diagonal") {
            out = detail::at_field(f.at("probs"), [&] {
                return DensityMatrix::diagonal(parse_real_vector(f.required("probs"), f.at("probs")));
            });
        } else if (name == "matrix") {
            out = detail::at_field(f.at("matrix"), [&] {
                return DensityMatrix(parse_matrix(f.required("matrix"), f.at("matrix")));
            });
        } else if (name == "maximally_mixed") {
            out = DensityMatrix::maximally_mixed(dim);
        } else {
            throw ConfigError(f.at("name"), "unknown state '" + name + "'");
        }
        f.finish();
        return out;
    });
}

/**
 * Channel literal. Strings: "identity", "dephase", "amplitude_damping(g)",
 * "depolarizing(p)". Objects by "name": identity/dephase {dim},
 * amplitude_damping {gamma}, depolarizing {p, dim}, unitary {matrix},
 * kraus {ops}, stochastic {a} (the classical channel of a column-stochastic
 * matrix), compose {channels} (applied right to left).
 */
[[nodiscard]] inline KrausChannel parse_channel(const Json &j, const std::string &where,
                                                Index default_dim = 2) {
    return detail::at_field(where, [&]() -> KrausChannel {
        if (j.is_string()) {
            const auto [name, arg] = detail::split_call(j.get<std::string>());
            if (name == "identity" && arg.empty()) {
                return channels::identity(default_dim);
            }
            if (name == "dephase" && arg.empty()) {
                return channels::dephase(default_dim);
            }
            if (name == "amplitude_damping" && !arg.empty()) {
                return channels::amplitude_damping(detail::parse_arg(arg, where));
            }
            if (name == "depolarizing" && !arg.empty()) {
                return channels::depolarizing(detail::parse_arg(arg, where), default_dim);
            }
            throw ConfigError(where, "unknown channel '" + j.get<std::string>() + "'");
        }
        Fields f(j, where);
        const std::string name = json_string(f.required("name"), f.at("name"));
        const auto dim_field = [&] {
            if (const auto *d = f.optional("dim")) {
                const auto v = json_integer(*d, f.at("dim"));
                if (v < 1) {
                    throw ConfigError(f.at("dim"), "dimension must be positive");
                }
                return static_cast<Index>(v);
            }
            return default_dim;
        };
        std::optional<KrausChannel> out;
        if (name == "identity") {
            out = channels::identity(dim_field());
        } else if (name == "dephase") {
            out = channels::dephase(dim_field());
        } else if (name == "amplitude_damping") {
            const double g = json_number(f.required("gamma"), f.at("gamma"));
            out = detail::at_field(f.at("gamma"), [&] { return channels::amplitude_damping(g); });
        } else if (name == "depolarizing") {
            const double p = json_number(f.required("p"), f.at("p"));
            const Index d = dim_field();
            out = detail::at_field(f.at("p"), [&] { return channels::depolarizing(p, d); });
        } else if (name == "unitary") {
            const Matrix u = parse_matrix(f.required("matrix"), f.at("matrix"));
            out = detail::at_field(f.at("matrix"), [&] { return channels::unitary(u); });
        } else if (name == "kraus") {
            const Json &ops = f.required("ops");
            if (!ops.is_array() || ops.empty()) {
                throw ConfigError(f.at("ops"), "expected a non-empty list of matrices");
            }
            std::vector<Matrix> ks;
            for (std::size_t k = 0; k < ops.size(); ++k) {
                ks.push_back(parse_matrix(ops[k], f.at("ops") + "[" + std::to_string(k) + "]"));
            }
            out = detail::at_field(f.at("ops"), [&] { return KrausChannel(std::move(ks)); });
        } else if (name == "stochastic") {
            const Matrix a = parse_matrix(f.required("a"), f.at("a"));
            if (a.imag().cwiseAbs().maxCoeff() > 0.0) {
                throw ConfigError(f.at("a"), "stochastic matrix must be real");
            }
            out = detail::at_field(f.at("a"), [&] {
                return build_ce_oi_channel(StochasticMatrix(a.real()));
            });
        } else if (name == "compose") {
            const Json &list = f.required("channels");
            if (!list.is_array() || list.empty()) {
                throw ConfigError(f.at("channels"), "expected a non-empty list of channels");
            }
            std::optional<KrausChannel> acc;
            for (std::size_t k = list.size(); k-- > 0;) {
                auto c = parse_channel(list[k], f.at("channels") + "[" + std::to_string(k) + "]",
                                       default_dim);
                acc = acc ? detail::at_field(f.at("channels"), [&] { return compose(c, *acc); })
                          : std::move(c);
            }
            out = std::move(acc);
        } else {
            throw ConfigError(f.at("name"), "unknown channel '" + name + "'");
        }
        f.finish();
        return std::move(*out);
    });
}

/// "X", "Y", "Z" (qubit) or a matrix with Q^2 = I.
[[nodiscard]] inline Dichotomic parse_dichotomic(const Json &j, const std::string &where) {
    return detail::at_field(where, [&]() -> Dichotomic {
        if (j.is_string()) {
            const std::string s = j.get<std::string>();
            if (s == "X" || s == "Y" || s == "Z") {
                return Dichotomic(PauliString{s}.matrix());
            }
            throw ConfigError(where, "unknown observable '" + s + "'");
        }
        return Dichotomic(parse_matrix(j, where));
    });
}

[[nodiscard]] inline std::optional<BasisKind> parse_basis(const Json *j, const std::string &where) {
    if (j == nullptr) {
        return std::nullopt;
    }
    const std::string s = json_string(*j, where);
    if (s == "pauli") {
        return BasisKind::pauli;
    }
    if (s == "light_touch") {
        return BasisKind::light_touch;
    }
    if (s == "default") {
        return std::nullopt;
    }
    throw ConfigError(where, "basis must be \"pauli\", \"light_touch\" or \"default\"");
}

} // namespace pdmwit
