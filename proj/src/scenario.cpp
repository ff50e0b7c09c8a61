// Copyright 2026 The histkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "histkit/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "histkit/errors.hpp"

namespace histkit {

namespace {

using YAML::Node;

[[noreturn]] void fail(const Node &n, const std::string &path, const std::string &what) {
    const YAML::Mark m = n.Mark();
    if (m.is_null()) {
        throw ParseError(what, 0, 0, path);
    }
    throw ParseError(what, m.line + 1, m.column + 1, path);
}

std::string join(const std::string &path, const std::string &key) {
    return path.empty() ? key : path + "." + key;
}

std::string at(const std::string &path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
}

void check_keys(const Node &n, const std::string &path, std::initializer_list<const char *> allowed) {
    if (!n.IsMap()) {
        fail(n, path, "expected a mapping");
    }
    for (const auto &kv : n) {
        const std::string key = kv.first.as<std::string>();
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char *a) { return key == a; })) {
            fail(kv.first, join(path, key), "unknown key '" + key + "'");
        }
    }
}

Node require(const Node &parent, const std::string &key, const std::string &path) {
    const Node n = parent[key];
    if (!n.IsDefined() || n.IsNull()) {
        fail(parent, join(path, key), "missing required key '" + key + "'");
    }
    return n;
}

template <typename T>
T scalar(const Node &n, const std::string &path, const char *type) {
    if (!n.IsScalar()) {
        fail(n, path, std::string("expected ") + type);
    }
    try {
        return n.as<T>();
    } catch (const YAML::BadConversion &) {
        fail(n, path, std::string("expected ") + type);
    }
}

int as_int(const Node &n, const std::string &path) {
    return scalar<int>(n, path, "an integer");
}

long long as_long(const Node &n, const std::string &path) {
    return scalar<long long>(n, path, "an integer");
}

double as_double(const Node &n, const std::string &path) {
    return scalar<double>(n, path, "a number");
}

std::string as_string(const Node &n, const std::string &path) {
    return scalar<std::string>(n, path, "a string");
}

bool as_bool(const Node &n, const std::string &path) {
    return scalar<bool>(n, path, "a boolean");
}

Complex as_complex(const Node &n, const std::string &path) {
    if (!n.IsScalar()) {
        fail(n, path, "expected a complex number");
    }
    try {
        return parse_complex(n.Scalar());
    } catch (const InputError &e) {
        fail(n, path, e.what());
    }
}

const Node &seq(const Node &n, const std::string &path) {
    if (!n.IsSequence()) {
        fail(n, path, "expected a sequence");
    }
    return n;
}

template <typename F>
auto list(const Node &n, const std::string &path, F item) {
    seq(n, path);
    std::vector<decltype(item(n, path))> out;
    for (std::size_t i = 0; i < n.size(); ++i) {
        out.push_back(item(n[i], at(path, i)));
    }
    return out;
}

ComplexRows complex_rows(const Node &n, const std::string &path) {
    ComplexRows rows = list(n, path, [](const Node &r, const std::string &p) { return list(r, p, as_complex); });
    if (rows.empty()) {
        fail(n, path, "matrix has no rows");
    }
    for (const auto &r : rows) {
        if (r.size() != rows.size()) {
            fail(n, path, "matrix must be square");
        }
    }
    return rows;
}

long long product_of(const std::vector<int> &dims) {
    long long n = 1;
    for (int d : dims) {
        n *= d;
    }
    return n;
}

/// Dimension a factor-qualified object acts on: the factor's, or the whole space when unqualified.
int target_dim(const ScenarioConfig &c, const std::string &factor) {
    return factor.empty() ? static_cast<int>(product_of(c.dims())) : c.spaces[c.factor_index(factor)].dim;
}

std::string resolve_factor(const ScenarioConfig &c, const Node &n, const std::string &path) {
    const std::string name = as_string(n, path);
    if (c.factor_index(name) < 0) {
        fail(n, path, "unknown factor '" + name + "'");
    }
    return name;
}

ConstructorSpec parse_constructor(const ScenarioConfig &c, const Node &n, const std::string &path) {
    ConstructorSpec s;
    if (n.IsScalar()) {
        if (n.Scalar() != "identity") {
            fail(n, path, "unknown constructor '" + n.Scalar() + "'");
        }
        return s;
    }
    if (!n.IsMap() || n.size() != 1) {
        fail(n, path, "constructor must be 'identity' or a single-key mapping");
    }
    const std::string kind = n.begin()->first.as<std::string>();
    const Node body = n.begin()->second;
    const std::string p = join(path, kind);
    if (kind == "controlled-flip") {
        check_keys(body, p, {"control", "target", "control_level"});
        s.kind = ConstructorSpec::Kind::controlled_flip;
        s.control = resolve_factor(c, require(body, "control", p), join(p, "control"));
        s.target = resolve_factor(c, require(body, "target", p), join(p, "target"));
        if (s.control == s.target) {
            fail(body, p, "control and target must differ");
        }
        if (body["control_level"]) {
            s.control_level = as_int(body["control_level"], join(p, "control_level"));
        }
        if (s.control_level < 0 || s.control_level >= target_dim(c, s.control)) {
            fail(body, join(p, "control_level"), "control level out of range");
        }
        return s;
    }
    if (kind == "phase") {
        check_keys(body, p, {"factor", "angles"});
        s.kind = ConstructorSpec::Kind::phase;
        s.factor = resolve_factor(c, require(body, "factor", p), join(p, "factor"));
        s.angles = list(require(body, "angles", p), join(p, "angles"), as_double);
        if (static_cast<int>(s.angles.size()) != target_dim(c, s.factor)) {
            fail(body, join(p, "angles"), "one angle per factor level required");
        }
        return s;
    }
    if (kind == "permutation") {
        check_keys(body, p, {"factor", "map"});
        s.kind = ConstructorSpec::Kind::permutation;
        if (body["factor"]) {
            s.factor = resolve_factor(c, body["factor"], join(p, "factor"));
        }
        s.map = list(require(body, "map", p), join(p, "map"), as_int);
        std::vector<int> sorted = s.map;
        std::sort(sorted.begin(), sorted.end());
        for (int i = 0; i < static_cast<int>(sorted.size()); ++i) {
            if (sorted[i] != i) {
                fail(body, join(p, "map"), "map is not a permutation");
            }
        }
        if (static_cast<int>(s.map.size()) != target_dim(c, s.factor)) {
            fail(body, join(p, "map"), "permutation size does not match the dimension");
        }
        return s;
    }
    if (kind == "matrix") {
        check_keys(body, p, {"factor", "rows", "scale"});
        s.kind = ConstructorSpec::Kind::matrix;
        if (body["factor"]) {
            s.factor = resolve_factor(c, body["factor"], join(p, "factor"));
        }
        s.rows = complex_rows(require(body, "rows", p), join(p, "rows"));
        if (body["scale"]) {
            s.scale = as_double(body["scale"], join(p, "scale"));
        }
        if (static_cast<int>(s.rows.size()) != target_dim(c, s.factor)) {
            fail(body, join(p, "rows"), "matrix size does not match the dimension");
        }
        return s;
    }
    if (kind == "sequence") {
        s.kind = ConstructorSpec::Kind::sequence;
        s.children = list(body, p, [&](const Node &x, const std::string &q) { return parse_constructor(c, x, q); });
        return s;
    }
    fail(n.begin()->first, p, "unknown constructor '" + kind + "'");
}

OutcomeSpec parse_outcomes(const ScenarioConfig &c, const Node &n, const std::string &path) {
    check_keys(n, path, {"factor", "sets", "projectors", "labels"});
    OutcomeSpec o;
    if (n["factor"]) {
        o.factor = resolve_factor(c, n["factor"], join(path, "factor"));
    }
    const int d = target_dim(c, o.factor);
    if (n["sets"] && n["projectors"]) {
        fail(n, path, "give either sets or projectors");
    }
    if (n["sets"]) {
        o.sets = list(n["sets"], join(path, "sets"), [&](const Node &s, const std::string &p) {
            auto v = list(s, p, as_int);
            for (int i : v) {
                if (i < 0 || i >= d) {
                    fail(s, p, "basis index " + std::to_string(i) + " out of range");
                }
            }
            return v;
        });
    } else if (n["projectors"]) {
        o.projectors = list(n["projectors"], join(path, "projectors"), [&](const Node &m, const std::string &p) {
            auto rows = complex_rows(m, p);
            if (static_cast<int>(rows.size()) != d) {
                fail(m, p, "projector size does not match the dimension");
            }
            return rows;
        });
    } else {
        fail(n, path, "missing required key 'sets' or 'projectors'");
    }
    if (n["labels"]) {
        o.labels = list(n["labels"], join(path, "labels"), as_string);
        const std::size_t count = o.sets.empty() ? o.projectors.size() : o.sets.size();
        if (o.labels.size() != count) {
            fail(n["labels"], join(path, "labels"), "one label per outcome required");
        }
    }
    return o;
}

InitialSpec parse_initial(const ScenarioConfig &c, const Node &n, const std::string &path) {
    check_keys(n, path, {"basis", "product", "amplitudes", "normalize"});
    InitialSpec s;
    const int given = (n["basis"] ? 1 : 0) + (n["product"] ? 1 : 0) + (n["amplitudes"] ? 1 : 0);
    if (given != 1) {
        fail(n, path, "give exactly one of basis, product, amplitudes");
    }
    const auto dims = c.dims();
    if (n["basis"]) {
        s.kind = InitialSpec::Kind::basis;
        s.basis = list(n["basis"], join(path, "basis"), as_int);
        if (s.basis.size() != dims.size()) {
            fail(n["basis"], join(path, "basis"), "one level per factor required");
        }
        for (std::size_t k = 0; k < dims.size(); ++k) {
            if (s.basis[k] < 0 || s.basis[k] >= dims[k]) {
                fail(n["basis"], at(join(path, "basis"), k), "level out of range");
            }
        }
    } else if (n["product"]) {
        s.kind = InitialSpec::Kind::product;
        s.product = list(n["product"], join(path, "product"),
                         [](const Node &v, const std::string &p) { return list(v, p, as_complex); });
        if (s.product.size() != dims.size()) {
            fail(n["product"], join(path, "product"), "one vector per factor required");
        }
        for (std::size_t k = 0; k < dims.size(); ++k) {
            if (static_cast<int>(s.product[k].size()) != dims[k]) {
                fail(n["product"][k], at(join(path, "product"), k), "vector length does not match the factor");
            }
        }
    } else {
        s.kind = InitialSpec::Kind::amplitudes;
        s.amplitudes = list(n["amplitudes"], join(path, "amplitudes"), as_complex);
        if (static_cast<long long>(s.amplitudes.size()) != product_of(dims)) {
            fail(n["amplitudes"], join(path, "amplitudes"), "amplitude count does not match the dimension");
        }
    }
    if (n["normalize"]) {
        s.normalize = as_bool(n["normalize"], join(path, "normalize"));
    }
    return s;
}

LatticeSection parse_lattice(const Node &n, const std::string &path) {
    check_keys(n, path, {"extent", "spacing", "mass", "epsilon"});
    LatticeSection l;
    if (n["extent"]) {
        l.extent = list(n["extent"], join(path, "extent"), as_int);
    }
    if (n["spacing"]) {
        l.spacing = as_double(n["spacing"], join(path, "spacing"));
    }
    if (n["mass"]) {
        l.mass = as_double(n["mass"], join(path, "mass"));
    }
    if (n["epsilon"]) {
        l.epsilon = as_double(n["epsilon"], join(path, "epsilon"));
    }
    try {
        l.to_spec().validate();
    } catch (const Error &e) {
        fail(n, path, e.what());
    }
    return l;
}

FockSection parse_fock(const Node &n, const std::string &path) {
    check_keys(n, path, {"sites", "types", "n_max", "vertex", "legs", "coupling", "primed", "factorization_coupling"});
    FockSection f;
    if (n["sites"]) {
        f.sites = list(n["sites"], join(path, "sites"),
                       [](const Node &s, const std::string &p) { return list(s, p, as_int); });
    }
    if (n["types"]) {
        f.types = list(n["types"], join(path, "types"), as_string);
    }
    if (n["n_max"]) {
        f.n_max = as_int(n["n_max"], join(path, "n_max"));
        if (f.n_max < 0) {
            fail(n["n_max"], join(path, "n_max"), "n_max must be non-negative");
        }
    }
    if (n["vertex"]) {
        f.vertex = as_string(n["vertex"], join(path, "vertex"));
        if (f.vertex != "conversion" && f.vertex != "scattering") {
            fail(n["vertex"], join(path, "vertex"), "vertex must be conversion or scattering");
        }
    }
    if (n["legs"]) {
        f.legs = list(n["legs"], join(path, "legs"), as_string);
    }
    if (f.legs.size() != 2) {
        fail(n, join(path, "legs"), "vertex needs exactly two leg types");
    }
    for (const auto &leg : f.legs) {
        if (std::find(f.types.begin(), f.types.end(), leg) == f.types.end()) {
            fail(n, join(path, "legs"), "unknown particle type '" + leg + "'");
        }
    }
    if (n["coupling"]) {
        f.coupling = as_complex(n["coupling"], join(path, "coupling"));
    }
    if (n["primed"]) {
        f.primed = as_bool(n["primed"], join(path, "primed"));
    }
    if (n["factorization_coupling"]) {
        f.factorization_coupling = as_double(n["factorization_coupling"], join(path, "factorization_coupling"));
    }
    return f;
}

EnvarianceSection parse_envariance(const Node &n, const std::string &path) {
    check_keys(n, path, {"capacities", "amplitudes", "sigmas", "ells", "swap"});
    EnvarianceSection e;
    if (n["capacities"]) {
        e.capacities = list(n["capacities"], join(path, "capacities"), as_int);
    }
    if (n["amplitudes"]) {
        e.amplitudes = list(n["amplitudes"], join(path, "amplitudes"), as_complex);
    }
    if (n["sigmas"]) {
        e.sigmas = list(n["sigmas"], join(path, "sigmas"), as_double);
    }
    if (n["ells"]) {
        e.ells = list(n["ells"], join(path, "ells"), as_long);
    }
    if (n["swap"]) {
        e.swap = list(n["swap"], join(path, "swap"), as_int);
    }
    const std::size_t k = e.capacities.size();
    if (e.amplitudes.size() != k || e.sigmas.size() != k || e.ells.size() != k) {
        fail(n, path, "capacities, amplitudes, sigmas and ells need one entry per outcome");
    }
    if (e.swap.size() != 2) {
        fail(n, join(path, "swap"), "swap needs two outcome labels");
    }
    return e;
}

BornSection parse_born(const Node &n, const std::string &path) {
    check_keys(n, path, {"m", "capacities"});
    BornSection b;
    b.m = list(require(n, "m", path), join(path, "m"), as_long);
    for (long long m : b.m) {
        if (m < 1) {
            fail(n["m"], join(path, "m"), "counts must be positive");
        }
    }
    if (n["capacities"]) {
        b.capacities = list(n["capacities"], join(path, "capacities"), as_int);
        if (b.capacities.size() != b.m.size()) {
            fail(n["capacities"], join(path, "capacities"), "one capacity per outcome required");
        }
    }
    return b;
}

CatSection parse_cat(const Node &n, const std::string &path) {
    check_keys(n, path, {"p_yes", "decay_amplitude", "box", "dims"});
    CatSection s;
    if (n["p_yes"] && n["decay_amplitude"]) {
        fail(n, path, "give either p_yes or decay_amplitude");
    }
    if (n["p_yes"]) {
        const double p = as_double(n["p_yes"], join(path, "p_yes"));
        if (p < 0.0 || p > 1.0) {
            fail(n["p_yes"], join(path, "p_yes"), "probability must lie in [0, 1]");
        }
        s.decay_amplitude = Complex(std::sqrt(p), 0.0);
    }
    if (n["decay_amplitude"]) {
        s.decay_amplitude = as_complex(n["decay_amplitude"], join(path, "decay_amplitude"));
    }
    if (n["box"]) {
        const std::string box = as_string(n["box"], join(path, "box"));
        if (box != "open" && box != "closed") {
            fail(n["box"], join(path, "box"), "box must be open or closed");
        }
        s.box_opened = box == "open";
    }
    if (n["dims"]) {
        auto d = list(n["dims"], join(path, "dims"), as_int);
        if (d.size() != 5) {
            fail(n["dims"], join(path, "dims"), "five factor dimensions required (R, D, C, B, E)");
        }
        std::copy(d.begin(), d.end(), s.dims.begin());
    }
    try {
        CatConfig cfg{s.decay_amplitude, s.box_opened, s.dims};
        cfg.validate();
    } catch (const Error &e) {
        fail(n, path, e.what());
    }
    return s;
}

}  // namespace

LatticeSpec LatticeSection::to_spec() const {
    LatticeSpec l;
    l.extent = extent;
    l.spacing = spacing;
    l.mass = mass;
    l.epsilon = epsilon;
    return l;
}

std::vector<int> ScenarioConfig::dims() const {
    std::vector<int> d;
    for (const auto &f : spaces) {
        d.push_back(f.dim);
    }
    return d;
}

int ScenarioConfig::factor_index(const std::string &name) const {
    for (std::size_t i = 0; i < spaces.size(); ++i) {
        if (spaces[i].name == name) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

Complex parse_complex(const std::string &raw) {
    std::string t;
    for (char ch : raw) {
        if (ch != ' ') {
            t += ch;
        }
    }
    auto number = [&](const std::string &s) {
        if (s.empty() || s == "+") {
            return 1.0;
        }
        if (s == "-") {
            return -1.0;
        }
        char *end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end != s.c_str() + s.size()) {
            throw InputError("malformed complex number '" + raw + "'");
        }
        return v;
    };
    if (t.empty()) {
        throw InputError("empty complex number");
    }
    if (t.back() != 'i' && t.back() != 'j') {
        return Complex(number(t), 0.0);
    }
    t.pop_back();
    std::size_t split = std::string::npos;
    for (std::size_t i = t.size(); i-- > 1;) {
        if ((t[i] == '+' || t[i] == '-') && t[i - 1] != 'e' && t[i - 1] != 'E') {
            split = i;
            break;
        }
    }
    if (split == std::string::npos) {
        return Complex(0.0, number(t));
    }
    const std::string re = t.substr(0, split);
    if (re.empty() || re == "+" || re == "-") {
        throw InputError("malformed complex number '" + raw + "'");
    }
    return Complex(number(re), number(t.substr(split)));
}

std::string format_complex(Complex z) {
    char buf[80];
    if (z.imag() == 0.0) {
        std::snprintf(buf, sizeof buf, "%.17g", z.real());
    } else if (z.real() == 0.0) {
        std::snprintf(buf, sizeof buf, "%.17gi", z.imag());
    } else {
        std::snprintf(buf, sizeof buf, "%.17g%+.17gi", z.real(), z.imag());
    }
    return buf;
}

ScenarioConfig parse_scenario(const std::string &text) {
    Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException &e) {
        throw ParseError(e.msg, e.mark.line + 1, e.mark.column + 1, "");
    }
    ScenarioConfig c;
    if (!root.IsDefined() || root.IsNull()) {
        throw ParseError("missing required section: spaces", 1, 1, "spaces");
    }
    check_keys(root, "",
               {"name", "tolerance", "spaces", "initial", "subsystems", "maps", "record", "mixing", "lattice", "fock",
                "envariance", "born", "cat"});
    const bool needs_spaces = root["initial"] || root["subsystems"] || root["maps"] || root["record"] || root["mixing"];
    if (!root["spaces"] && (needs_spaces || root.size() == 0)) {
        fail(root, "spaces", "missing required section: spaces");
    }
    if (root["name"]) {
        c.name = as_string(root["name"], "name");
    }
    if (root["tolerance"]) {
        c.tolerance = as_double(root["tolerance"], "tolerance");
        if (!(*c.tolerance > 0.0)) {
            fail(root["tolerance"], "tolerance", "tolerance must be positive");
        }
    }
    if (root["spaces"]) {
        std::set<std::string> names;
        c.spaces = list(root["spaces"], "spaces", [&](const Node &f, const std::string &p) {
            check_keys(f, p, {"name", "dim"});
            FactorSpec s{as_string(require(f, "name", p), join(p, "name")), as_int(require(f, "dim", p), join(p, "dim"))};
            if (s.dim < 1) {
                fail(f["dim"], join(p, "dim"), "dimension must be positive");
            }
            if (!names.insert(s.name).second) {
                fail(f, join(p, "name"), "duplicate factor name '" + s.name + "'");
            }
            return s;
        });
        if (c.spaces.empty()) {
            fail(root["spaces"], "spaces", "at least one factor required");
        }
        if (product_of(c.dims()) > static_cast<long long>(kDefaultMaxDim)) {
            fail(root["spaces"], "spaces", "total dimension exceeds " + std::to_string(kDefaultMaxDim));
        }
    }
    if (root["initial"]) {
        c.initial = parse_initial(c, root["initial"], "initial");
    }
    if (root["subsystems"]) {
        std::set<std::string> names;
        c.subsystems = list(root["subsystems"], "subsystems", [&](const Node &s, const std::string &p) {
            check_keys(s, p, {"name", "interaction", "outcomes"});
            SubsystemSpec sub;
            sub.name = as_string(require(s, "name", p), join(p, "name"));
            if (!names.insert(sub.name).second) {
                fail(s["name"], join(p, "name"), "duplicate subsystem name '" + sub.name + "'");
            }
            if (s["interaction"]) {
                sub.interaction = parse_constructor(c, s["interaction"], join(p, "interaction"));
            }
            sub.outcomes = parse_outcomes(c, require(s, "outcomes", p), join(p, "outcomes"));
            return sub;
        });
    }
    if (root["maps"]) {
        const Node maps = root["maps"];
        if (!maps.IsMap()) {
            fail(maps, "maps", "expected a mapping");
        }
        for (const auto &kv : maps) {
            const std::string name = kv.first.as<std::string>();
            const std::string p = join("maps", name);
            auto it = std::find_if(c.subsystems.begin(), c.subsystems.end(),
                                   [&](const SubsystemSpec &s) { return s.name == name; });
            if (it == c.subsystems.end() || it == c.subsystems.begin()) {
                fail(kv.first, p, "maps must be keyed by a non-first subsystem name");
            }
            if (!kv.second.IsMap()) {
                fail(kv.second, p, "expected a mapping");
            }
            CorrelationMap m;
            for (const auto &e : kv.second) {
                m[as_int(e.first, p)] = as_int(e.second, join(p, e.first.Scalar()));
            }
            c.maps[name] = m;
        }
    }
    if (root["record"]) {
        const Node r = root["record"];
        check_keys(r, "record", {"apparatus", "environment"});
        c.record = RecordSpec{as_string(require(r, "apparatus", "record"), "record.apparatus"),
                              as_string(require(r, "environment", "record"), "record.environment")};
        for (const auto &name : {c.record->apparatus, c.record->environment}) {
            if (std::none_of(c.subsystems.begin(), c.subsystems.end(),
                             [&](const SubsystemSpec &s) { return s.name == name; })) {
                fail(r, "record", "unknown subsystem '" + name + "'");
            }
        }
    }
    if (root["mixing"]) {
        c.mixing = list(root["mixing"], "mixing",
                        [](const Node &r, const std::string &p) { return list(r, p, as_double); });
        for (const auto &r : c.mixing) {
            if (r.size() != c.mixing.size()) {
                fail(root["mixing"], "mixing", "mixing matrix must be square");
            }
        }
    }
    if (root["lattice"]) {
        c.lattice = parse_lattice(root["lattice"], "lattice");
    }
    if (root["fock"]) {
        c.fock = parse_fock(root["fock"], "fock");
    }
    if (root["envariance"]) {
        c.envariance = parse_envariance(root["envariance"], "envariance");
    }
    if (root["born"]) {
        c.born = parse_born(root["born"], "born");
    }
    if (root["cat"]) {
        c.cat = parse_cat(root["cat"], "cat");
    }
    return c;
}

ScenarioConfig load_scenario(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot read scenario '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

namespace {

void emit_complex(YAML::Emitter &e, Complex z) {
    if (z.imag() == 0.0) {
        e << z.real();
    } else {
        e << format_complex(z);
    }
}

void emit_rows(YAML::Emitter &e, const ComplexRows &rows) {
    e << YAML::BeginSeq;
    for (const auto &r : rows) {
        e << YAML::Flow << YAML::BeginSeq;
        for (const auto &z : r) {
            emit_complex(e, z);
        }
        e << YAML::EndSeq;
    }
    e << YAML::EndSeq;
}

template <typename T>
void emit_flow(YAML::Emitter &e, const std::vector<T> &v) {
    e << YAML::Flow << YAML::BeginSeq;
    for (const auto &x : v) {
        e << x;
    }
    e << YAML::EndSeq;
}

void emit_complex_list(YAML::Emitter &e, const std::vector<Complex> &v) {
    e << YAML::Flow << YAML::BeginSeq;
    for (const auto &z : v) {
        emit_complex(e, z);
    }
    e << YAML::EndSeq;
}

void emit_constructor(YAML::Emitter &e, const ConstructorSpec &s) {
    using K = ConstructorSpec::Kind;
    if (s.kind == K::identity) {
        e << "identity";
        return;
    }
    e << YAML::BeginMap;
    switch (s.kind) {
        case K::controlled_flip:
            e << YAML::Key << "controlled-flip" << YAML::Value << YAML::BeginMap;
            e << YAML::Key << "control" << YAML::Value << s.control;
            e << YAML::Key << "target" << YAML::Value << s.target;
            e << YAML::Key << "control_level" << YAML::Value << s.control_level;
            e << YAML::EndMap;
            break;
        case K::phase:
            e << YAML::Key << "phase" << YAML::Value << YAML::BeginMap;
            e << YAML::Key << "factor" << YAML::Value << s.factor;
            e << YAML::Key << "angles" << YAML::Value;
            emit_flow(e, s.angles);
            e << YAML::EndMap;
            break;
        case K::permutation:
            e << YAML::Key << "permutation" << YAML::Value << YAML::BeginMap;
            if (!s.factor.empty()) {
                e << YAML::Key << "factor" << YAML::Value << s.factor;
            }
            e << YAML::Key << "map" << YAML::Value;
            emit_flow(e, s.map);
            e << YAML::EndMap;
            break;
        case K::matrix:
            e << YAML::Key << "matrix" << YAML::Value << YAML::BeginMap;
            if (!s.factor.empty()) {
                e << YAML::Key << "factor" << YAML::Value << s.factor;
            }
            e << YAML::Key << "rows" << YAML::Value;
            emit_rows(e, s.rows);
            if (s.scale != 1.0) {
                e << YAML::Key << "scale" << YAML::Value << s.scale;
            }
            e << YAML::EndMap;
            break;
        case K::sequence:
            e << YAML::Key << "sequence" << YAML::Value << YAML::BeginSeq;
            for (const auto &child : s.children) {
                emit_constructor(e, child);
            }
            e << YAML::EndSeq;
            break;
        case K::identity:
            break;
    }
    e << YAML::EndMap;
}

}  // namespace

std::string emit_scenario(const ScenarioConfig &c) {
    YAML::Emitter e;
    e.SetDoublePrecision(17);
    e << YAML::BeginMap;
    if (!c.name.empty()) {
        e << YAML::Key << "name" << YAML::Value << c.name;
    }
    if (c.tolerance) {
        e << YAML::Key << "tolerance" << YAML::Value << *c.tolerance;
    }
    if (!c.spaces.empty()) {
        e << YAML::Key << "spaces" << YAML::Value << YAML::BeginSeq;
        for (const auto &f : c.spaces) {
            e << YAML::Flow << YAML::BeginMap << YAML::Key << "name" << YAML::Value << f.name << YAML::Key << "dim"
              << YAML::Value << f.dim << YAML::EndMap;
        }
        e << YAML::EndSeq;
    }
    if (c.initial) {
        const InitialSpec &s = *c.initial;
        e << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
        switch (s.kind) {
            case InitialSpec::Kind::basis:
                e << YAML::Key << "basis" << YAML::Value;
                emit_flow(e, s.basis);
                break;
            case InitialSpec::Kind::product:
                e << YAML::Key << "product" << YAML::Value;
                emit_rows(e, s.product);
                break;
            case InitialSpec::Kind::amplitudes:
                e << YAML::Key << "amplitudes" << YAML::Value;
                emit_complex_list(e, s.amplitudes);
                break;
        }
        if (s.normalize) {
            e << YAML::Key << "normalize" << YAML::Value << true;
        }
        e << YAML::EndMap;
    }
    if (!c.subsystems.empty()) {
        e << YAML::Key << "subsystems" << YAML::Value << YAML::BeginSeq;
        for (const auto &s : c.subsystems) {
            e << YAML::BeginMap << YAML::Key << "name" << YAML::Value << s.name;
            e << YAML::Key << "interaction" << YAML::Value;
            emit_constructor(e, s.interaction);
            e << YAML::Key << "outcomes" << YAML::Value << YAML::BeginMap;
            if (!s.outcomes.factor.empty()) {
                e << YAML::Key << "factor" << YAML::Value << s.outcomes.factor;
            }
            if (!s.outcomes.sets.empty()) {
                e << YAML::Key << "sets" << YAML::Value << YAML::Flow << YAML::BeginSeq;
                for (const auto &set : s.outcomes.sets) {
                    emit_flow(e, set);
                }
                e << YAML::EndSeq;
            }
            if (!s.outcomes.projectors.empty()) {
                e << YAML::Key << "projectors" << YAML::Value << YAML::BeginSeq;
                for (const auto &p : s.outcomes.projectors) {
                    emit_rows(e, p);
                }
                e << YAML::EndSeq;
            }
            if (!s.outcomes.labels.empty()) {
                e << YAML::Key << "labels" << YAML::Value;
                emit_flow(e, s.outcomes.labels);
            }
            e << YAML::EndMap << YAML::EndMap;
        }
        e << YAML::EndSeq;
    }
    if (!c.maps.empty()) {
        e << YAML::Key << "maps" << YAML::Value << YAML::BeginMap;
        for (const auto &[name, m] : c.maps) {
            e << YAML::Key << name << YAML::Value << YAML::Flow << YAML::BeginMap;
            for (const auto &[a, b] : m) {
                e << YAML::Key << a << YAML::Value << b;
            }
            e << YAML::EndMap;
        }
        e << YAML::EndMap;
    }
    if (c.record) {
        e << YAML::Key << "record" << YAML::Value << YAML::BeginMap << YAML::Key << "apparatus" << YAML::Value
          << c.record->apparatus << YAML::Key << "environment" << YAML::Value << c.record->environment << YAML::EndMap;
    }
    if (!c.mixing.empty()) {
        e << YAML::Key << "mixing" << YAML::Value << YAML::BeginSeq;
        for (const auto &r : c.mixing) {
            emit_flow(e, r);
        }
        e << YAML::EndSeq;
    }
    if (c.lattice) {
        const auto &l = *c.lattice;
        e << YAML::Key << "lattice" << YAML::Value << YAML::BeginMap;
        e << YAML::Key << "extent" << YAML::Value;
        emit_flow(e, l.extent);
        e << YAML::Key << "spacing" << YAML::Value << l.spacing;
        e << YAML::Key << "mass" << YAML::Value << l.mass;
        e << YAML::Key << "epsilon" << YAML::Value << l.epsilon;
        e << YAML::EndMap;
    }
    if (c.fock) {
        const auto &f = *c.fock;
        e << YAML::Key << "fock" << YAML::Value << YAML::BeginMap;
        e << YAML::Key << "sites" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (const auto &s : f.sites) {
            emit_flow(e, s);
        }
        e << YAML::EndSeq;
        e << YAML::Key << "types" << YAML::Value;
        emit_flow(e, f.types);
        e << YAML::Key << "n_max" << YAML::Value << f.n_max;
        e << YAML::Key << "vertex" << YAML::Value << f.vertex;
        e << YAML::Key << "legs" << YAML::Value;
        emit_flow(e, f.legs);
        e << YAML::Key << "coupling" << YAML::Value;
        emit_complex(e, f.coupling);
        e << YAML::Key << "primed" << YAML::Value << f.primed;
        e << YAML::Key << "factorization_coupling" << YAML::Value << f.factorization_coupling;
        e << YAML::EndMap;
    }
    if (c.envariance) {
        const auto &v = *c.envariance;
        e << YAML::Key << "envariance" << YAML::Value << YAML::BeginMap;
        e << YAML::Key << "capacities" << YAML::Value;
        emit_flow(e, v.capacities);
        e << YAML::Key << "amplitudes" << YAML::Value;
        emit_complex_list(e, v.amplitudes);
        e << YAML::Key << "sigmas" << YAML::Value;
        emit_flow(e, v.sigmas);
        e << YAML::Key << "ells" << YAML::Value;
        emit_flow(e, v.ells);
        e << YAML::Key << "swap" << YAML::Value;
        emit_flow(e, v.swap);
        e << YAML::EndMap;
    }
    if (c.born) {
        e << YAML::Key << "born" << YAML::Value << YAML::BeginMap << YAML::Key << "m" << YAML::Value;
        emit_flow(e, c.born->m);
        if (!c.born->capacities.empty()) {
            e << YAML::Key << "capacities" << YAML::Value;
            emit_flow(e, c.born->capacities);
        }
        e << YAML::EndMap;
    }
    if (c.cat) {
        const auto &s = *c.cat;
        e << YAML::Key << "cat" << YAML::Value << YAML::BeginMap;
        e << YAML::Key << "decay_amplitude" << YAML::Value;
        emit_complex(e, s.decay_amplitude);
        e << YAML::Key << "box" << YAML::Value << (s.box_opened ? "open" : "closed");
        e << YAML::Key << "dims" << YAML::Value;
        emit_flow(e, std::vector<int>(s.dims.begin(), s.dims.end()));
        e << YAML::EndMap;
    }
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

Matrix build_constructor(const ScenarioConfig &c, const ConstructorSpec &spec, const std::string &path) {
    using K = ConstructorSpec::Kind;
    const std::vector<int> dims = c.dims();
    const int n = static_cast<int>(product_of(dims));
    auto place = [&](const Matrix &local) {
        return spec.factor.empty() ? local : embed(local, dims, c.factor_index(spec.factor));
    };
    Matrix u;
    switch (spec.kind) {
        case K::identity:
            u = Matrix::Identity(n, n);
            break;
        case K::controlled_flip: {
            const int ci = c.factor_index(spec.control);
            const int ti = c.factor_index(spec.target);
            u = Matrix::Zero(n, n);
            for (int i = 0; i < n; ++i) {
                std::vector<int> d(dims.size());
                int rest = i;
                for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
                    d[k] = rest % dims[k];
                    rest /= dims[k];
                }
                if (d[ci] == spec.control_level && d[ti] < 2) {
                    d[ti] = 1 - d[ti];
                }
                int j = 0;
                for (std::size_t k = 0; k < dims.size(); ++k) {
                    j = j * dims[k] + d[k];
                }
                u(j, i) = 1.0;
            }
            break;
        }
        case K::phase: {
            Matrix local = Matrix::Zero(spec.angles.size(), spec.angles.size());
            for (std::size_t k = 0; k < spec.angles.size(); ++k) {
                local(k, k) = std::polar(1.0, spec.angles[k]);
            }
            u = place(local);
            break;
        }
        case K::permutation: {
            const int d = static_cast<int>(spec.map.size());
            Matrix local = Matrix::Zero(d, d);
            for (int j = 0; j < d; ++j) {
                local(spec.map[j], j) = 1.0;
            }
            u = place(local);
            break;
        }
        case K::matrix: {
            const int d = static_cast<int>(spec.rows.size());
            Matrix local(d, d);
            for (int r = 0; r < d; ++r) {
                for (int k = 0; k < d; ++k) {
                    local(r, k) = spec.scale * spec.rows[r][k];
                }
            }
            u = place(local);
            break;
        }
        case K::sequence:
            u = Matrix::Identity(n, n);
            for (std::size_t k = 0; k < spec.children.size(); ++k) {
                u = build_constructor(c, spec.children[k], path + ".sequence[" + std::to_string(k) + "]") * u;
            }
            break;
    }
    const double r = unitarity_residual(u);
    if (r > kAlgebraTol) {
        throw InputError(path + ": interaction is not unitary (residual " + std::to_string(r) + ")");
    }
    return u;
}

ProjectorFamily build_outcomes(const ScenarioConfig &c, const OutcomeSpec &spec, const std::string &path) {
    const std::vector<int> dims = c.dims();
    const int n = static_cast<int>(product_of(dims));
    const int d = target_dim(c, spec.factor);
    ProjectorFamily local;
    if (!spec.sets.empty()) {
        local = ProjectorFamily::from_index_sets(d, spec.sets, spec.labels);
    } else {
        local.dim = d;
        for (std::size_t i = 0; i < spec.projectors.size(); ++i) {
            Matrix p(d, d);
            for (int r = 0; r < d; ++r) {
                for (int k = 0; k < d; ++k) {
                    p(r, k) = spec.projectors[i][r][k];
                }
            }
            local.members.push_back(p);
            local.labels.push_back(i < spec.labels.size() ? spec.labels[i] : std::to_string(i));
        }
    }
    ProjectorFamily f = local;
    if (!spec.factor.empty()) {
        f.dim = n;
        for (auto &m : f.members) {
            m = embed(m, dims, c.factor_index(spec.factor));
        }
    }
    const ProjectorReport r = validate_projector_family(f);
    if (!r.pass) {
        throw InputError(path + ": outcomes do not form a complete orthogonal projector family");
    }
    return f;
}

Vector build_initial(const ScenarioConfig &c) {
    if (!c.initial) {
        throw InputError("initial: section required for this command");
    }
    const InitialSpec &s = *c.initial;
    const std::vector<int> dims = c.dims();
    Vector v;
    switch (s.kind) {
        case InitialSpec::Kind::basis: {
            int j = 0;
            for (std::size_t k = 0; k < dims.size(); ++k) {
                j = j * dims[k] + s.basis[k];
            }
            v = basis_vector(static_cast<int>(product_of(dims)), j);
            break;
        }
        case InitialSpec::Kind::product: {
            std::vector<Vector> parts;
            for (const auto &p : s.product) {
                parts.push_back(Eigen::Map<const Vector>(p.data(), static_cast<Eigen::Index>(p.size())));
            }
            v = tensor_product(parts);
            break;
        }
        case InitialSpec::Kind::amplitudes:
            v = Eigen::Map<const Vector>(s.amplitudes.data(), static_cast<Eigen::Index>(s.amplitudes.size()));
            break;
    }
    const double norm = v.norm();
    if (s.normalize) {
        if (norm == 0.0) {
            throw InputError("initial: zero vector cannot be normalized");
        }
        v /= norm;
    } else if (std::abs(norm - 1.0) > kUnitaryTol) {
        throw InputError("initial: state is not unit-norm (norm " + std::to_string(norm) + "); set normalize: true");
    }
    return v;
}

HistorySetup build_history_setup(const ScenarioConfig &c) {
    if (c.subsystems.empty()) {
        throw InputError("subsystems: at least one entry required for this command");
    }
    HistorySetup h;
    std::vector<Matrix> steps;
    for (std::size_t k = 0; k < c.subsystems.size(); ++k) {
        const std::string p = "subsystems[" + std::to_string(k) + "]";
        steps.push_back(build_constructor(c, c.subsystems[k].interaction, p + ".interaction"));
        h.family.slots.push_back(build_outcomes(c, c.subsystems[k].outcomes, p + ".outcomes"));
    }
    h.schedule = EvolutionSchedule::uniform(steps);
    h.initial = build_initial(c);
    return h;
}

SubsystemModel build_subsystem_model(const ScenarioConfig &c) {
    if (c.subsystems.empty()) {
        throw InputError("subsystems: at least one entry required for this command");
    }
    SubsystemModel m;
    m.factor_dims = c.dims();
    const Vector initial = build_initial(c);
    m.initial = OutcomeFamily::in_state(rank_one_projector(initial));
    m.maps.assign(c.subsystems.size(), std::nullopt);
    for (std::size_t k = 0; k < c.subsystems.size(); ++k) {
        const auto &s = c.subsystems[k];
        const std::string p = "subsystems[" + std::to_string(k) + "]";
        m.subsystems.push_back({s.name, build_constructor(c, s.interaction, p + ".interaction"),
                                OutcomeFamily::guaranteed(build_outcomes(c, s.outcomes, p + ".outcomes"))});
        auto it = c.maps.find(s.name);
        if (it != c.maps.end()) {
            m.maps[k] = it->second;
        }
    }
    const std::string &sys = c.subsystems.front().outcomes.factor;
    m.system_factor = sys.empty() ? 0 : c.factor_index(sys);
    m.validate();
    return m;
}

}  // namespace histkit
