#include "ndde/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <vector>

#include <fmt/format.h>

namespace ndde {

ConfigError::ConfigError(const std::string& message, std::size_t line)
    : std::runtime_error(line ? fmt::format("line {}: {}", line, message) : message), line_(line) {}

namespace {

struct Entry {
    std::string key;
    std::string value;
    std::size_t line = 0;
};

struct Section {
    std::string name;
    std::size_t line = 0;
    std::vector<Entry> entries;

    [[nodiscard]] const Entry* find(std::string_view key) const {
        for (const auto& e : entries) {
            if (e.key == key) return &e;
        }
        return nullptr;
    }
};

const std::set<std::string, std::less<>> kAllowedKeys[] = {
    {"t0", "a", "a_sup", "a_inf", "g_lag", "g_lag_sup", "g_lag_inf"},
    {"b", "b_sup", "b_inf", "h_lag", "h_lag_sup", "h_lag_inf"},
    {"phi", "psi", "x0"},
    {"f", "f_bound"},
    {"window", "norm_step", "solver_h", "t_end", "lambda_hi", "tol"},
};

const std::set<std::string, std::less<>>* allowed_keys(std::string_view section) {
    if (section == "equation") return &kAllowedKeys[0];
    if (section == "term") return &kAllowedKeys[1];
    if (section == "initial") return &kAllowedKeys[2];
    if (section == "forcing") return &kAllowedKeys[3];
    if (section == "numerics") return &kAllowedKeys[4];
    return nullptr;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool is_identifier(std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    }
    return true;
}

bool is_reserved(std::string_view name) {
    static const std::set<std::string, std::less<>> reserved = {"t",   "pi",   "e",   "sin", "cos", "exp",
                                                                "log", "sqrt", "abs", "min", "max"};
    return reserved.contains(name);
}

std::vector<Section> tokenize(std::string_view text) {
    std::vector<Section> sections;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        std::string_view raw = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;

        // Strip a trailing comment that is not inside quotes.
        bool quoted = false;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] == '"') quoted = !quoted;
            if (raw[i] == '#' && !quoted) {
                raw = raw.substr(0, i);
                break;
            }
        }
        const std::string_view line = trim(raw);
        if (line.empty()) {
            if (end == text.size()) break;
            continue;
        }

        if (line.front() == '[') {
            const bool array = line.starts_with("[[");
            const std::string_view close = array ? "]]" : "]";
            if (!line.ends_with(close)) throw ConfigError(fmt::format("malformed section header '{}'", line), line_no);
            const auto name = std::string(trim(line.substr(array ? 2 : 1, line.size() - (array ? 4 : 2))));
            if (array != (name == "term")) {
                throw ConfigError(array ? fmt::format("unknown array section '[[{}]]'", name)
                                        : std::string("delayed terms are declared with '[[term]]'"),
                                  line_no);
            }
            if (name != "params" && !allowed_keys(name)) {
                throw ConfigError(fmt::format("unknown section '[{}]'", name), line_no);
            }
            if (name != "term") {
                for (const auto& s : sections) {
                    if (s.name == name) throw ConfigError(fmt::format("duplicate section '[{}]'", name), line_no);
                }
            }
            sections.push_back({name, line_no, {}});
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(fmt::format("expected 'key = value', got '{}'", line), line_no);
        if (sections.empty()) throw ConfigError("key outside of any section", line_no);
        const auto key = std::string(trim(line.substr(0, eq)));
        std::string_view value = trim(line.substr(eq + 1));
        if (!is_identifier(key)) throw ConfigError(fmt::format("invalid key '{}'", key), line_no);
        if (!value.empty() && value.front() == '"') {
            if (value.size() < 2 || value.back() != '"') throw ConfigError(fmt::format("unterminated string for '{}'", key), line_no);
            value = value.substr(1, value.size() - 2);
        }
        Section& current = sections.back();
        if (const auto* allowed = allowed_keys(current.name); allowed && !allowed->contains(key)) {
            throw ConfigError(fmt::format("unknown key '{}' in [{}]", key, current.name), line_no);
        }
        if (current.find(key)) throw ConfigError(fmt::format("duplicate key '{}' in [{}]", key, current.name), line_no);
        current.entries.push_back({key, std::string(value), line_no});
        if (end == text.size()) break;
    }
    return sections;
}

class Builder {
public:
    Builder(const std::vector<Section>& sections, const ConfigOverrides& overrides)
        : sections_(sections), overrides_(overrides) {}

    ProblemConfig build() {
        ProblemConfig cfg;
        read_params();
        cfg.params = params_;

        const Section* equation = single("equation");
        if (!equation) throw ConfigError("missing section [equation]", 0);
        const Section* initial = single("initial");
        if (!initial) throw ConfigError("missing section [initial]", 0);
        const Section* forcing = single("forcing");
        const Section* numerics = single("numerics");

        NeutralEquation& eq = cfg.equation;
        eq.t0 = number_or(*equation, "t0", 0.0);
        eq.a = scalar_fn(*equation, "a");
        const Entry& g = require(*equation, "g_lag");
        const Expr g_body = expression(g, "equation");

        std::vector<std::pair<const Section*, Expr>> term_lags;
        for (const auto& s : sections_) {
            if (s.name != "term") continue;
            DelayTerm term;
            term.coeff = scalar_fn(s, "b");
            eq.terms.push_back(std::move(term));
            term_lags.emplace_back(&s, expression(require(s, "h_lag"), "term"));
        }
        if (eq.terms.empty()) throw ConfigError("at least one [[term]] block is required", 0);

        // Lag bounds come first: the default norm window scales with them.
        const double provisional = 40.0 * std::numbers::pi;
        const NormWindow probe{Interval{eq.t0, eq.t0 + provisional}, 1e-3 * provisional};
        eq.g_lag = lag_fn(*equation, "g_lag", g_body, probe);
        for (std::size_t k = 0; k < term_lags.size(); ++k) {
            eq.terms[k].lag = lag_fn(*term_lags[k].first, "h_lag", term_lags[k].second, probe);
        }

        const std::optional<double> width =
            overrides_.window ? overrides_.window : optional_number(numerics, "window");
        const std::optional<double> step =
            overrides_.norm_step ? overrides_.norm_step : optional_number(numerics, "norm_step");
        Numerics& num = cfg.numerics;
        num.norm = default_norm_window(eq, width, step);
        if (!(num.norm.step > 0.0)) throw ConfigError("norm_step must be positive", 0);
        if (num.norm.window.hi != probe.window.hi || num.norm.step != probe.step) {
            eq.g_lag = lag_fn(*equation, "g_lag", g_body, num.norm);
            for (std::size_t k = 0; k < term_lags.size(); ++k) {
                eq.terms[k].lag = lag_fn(*term_lags[k].first, "h_lag", term_lags[k].second, num.norm);
            }
        }

        num.solver_h = overrides_.solver_h.value_or(numerics ? number_or(*numerics, "solver_h", 1e-3) : 1e-3);
        num.t_end = overrides_.t_end.value_or(numerics ? number_or(*numerics, "t_end", eq.t0 + 60.0) : eq.t0 + 60.0);
        num.lambda_hi = numerics ? number_or(*numerics, "lambda_hi", 1.0) : 1.0;
        num.tol = numerics ? number_or(*numerics, "tol", 1e-6) : 1e-6;
        if (!(num.solver_h > 0.0)) throw ConfigError("solver_h must be positive", 0);
        if (!(num.t_end > eq.t0)) throw ConfigError("t_end must exceed t0", 0);
        if (!(num.lambda_hi > 0.0) || !(num.tol > 0.0)) throw ConfigError("lambda_hi and tol must be positive", 0);

        ScalarFn phi(expression(require(*initial, "phi"), "initial"));
        ScalarFn psi(expression(require(*initial, "psi"), "initial"));
        cfg.initial = InitialData::consistent(std::move(phi), std::move(psi), eq.t0);
        if (const Entry* x0 = initial->find("x0")) {
            const double declared = constant(*x0, "initial");
            if (std::abs(declared - cfg.initial.x0) > 1e-12 * (1.0 + std::abs(declared))) {
                throw ConfigError(fmt::format("[initial] x0 = {} differs from phi(t0) = {}", declared, cfg.initial.x0),
                                  x0->line);
            }
        }

        cfg.forcing = ScalarFn::constant(0.0);
        if (forcing) {
            if (const Entry* f = forcing->find("f")) cfg.forcing = ScalarFn(expression(*f, "forcing"));
        }
        cfg.unforced = !cfg.forcing.body.depends_on_t() && cfg.forcing(eq.t0) == 0.0;
        if (forcing && forcing->find("f_bound")) {
            cfg.f_bound = constant(*forcing->find("f_bound"), "forcing");
        } else if (!cfg.unforced) {
            cfg.f_bound = estimate_norm(cfg.forcing, Interval{eq.t0, num.t_end}, num.norm.step).value;
        }
        return cfg;
    }

private:
    const Section* single(std::string_view name) const {
        for (const auto& s : sections_) {
            if (s.name == name) return &s;
        }
        return nullptr;
    }

    const Entry& require(const Section& s, std::string_view key) const {
        if (const Entry* e = s.find(key)) return *e;
        throw ConfigError(fmt::format("missing required key '{}' in [{}]", key, s.name), s.line);
    }

    Expr expression(const Entry& e, std::string_view section) const {
        try {
            return parse(e.value, params_);
        } catch (const ParseError& err) {
            throw ConfigError(fmt::format("[{}] {}: {}", section, e.key, err.what()), e.line);
        }
    }

    double constant(const Entry& e, std::string_view section) const {
        const Expr ex = expression(e, section);
        if (ex.depends_on_t()) throw ConfigError(fmt::format("[{}] {} must not depend on t", section, e.key), e.line);
        try {
            return ex.eval(0.0);
        } catch (const DomainError& err) {
            throw ConfigError(fmt::format("[{}] {}: {}", section, e.key, err.what()), e.line);
        }
    }

    double number_or(const Section& s, std::string_view key, double fallback) const {
        const Entry* e = s.find(key);
        return e ? constant(*e, s.name) : fallback;
    }

    std::optional<double> optional_number(const Section* s, std::string_view key) const {
        if (!s) return std::nullopt;
        const Entry* e = s->find(key);
        if (!e) return std::nullopt;
        return constant(*e, s->name);
    }

    ScalarFn scalar_fn(const Section& s, const std::string& key) const {
        const Entry& e = require(s, key);
        ScalarFn fn(expression(e, s.name));
        fn.declared_sup = optional_number(&s, key + "_sup");
        fn.declared_inf = optional_number(&s, key + "_inf");
        if (fn.is_constant() && !fn.declared_sup && !fn.declared_inf) {
            const double v = fn(0.0);
            fn.declared_sup = v;
            fn.declared_inf = v;
        }
        return fn;
    }

    LagFn lag_fn(const Section& s, const std::string& key, const Expr& body, const NormWindow& norm) const {
        const auto sup = optional_number(&s, key + "_sup");
        const auto inf = optional_number(&s, key + "_inf");
        if (!body.depends_on_t() && !sup && !inf) return LagFn(body, body.eval(0.0), body.eval(0.0));
        LagFn lag = (sup && inf) ? LagFn(body, *sup, *inf) : LagFn::sampled(body, norm.window, norm.step);
        if (sup) lag.lag_sup = *sup;
        if (inf) lag.lag_inf = *inf;
        return lag;
    }

    void read_params() {
        const Section* p = single("params");
        if (p) {
            for (const auto& e : p->entries) {
                if (is_reserved(e.key)) throw ConfigError(fmt::format("parameter name '{}' is reserved", e.key), e.line);
                // Overrides apply in place so later parameters see them.
                const auto it = overrides_.params.find(e.key);
                params_[e.key] = it != overrides_.params.end() ? it->second : constant(e, "params");
            }
        }
        for (const auto& [name, value] : overrides_.params) {
            if (!params_.contains(name)) throw ConfigError(fmt::format("unknown parameter '{}'", name), 0);
        }
    }

    const std::vector<Section>& sections_;
    const ConfigOverrides& overrides_;
    ParameterTable params_;
};

} // namespace

ProblemConfig parse_config(std::string_view text, const ConfigOverrides& overrides) {
    const auto sections = tokenize(text);
    return Builder(sections, overrides).build();
}

ProblemConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path.string()), 0);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), overrides);
}

} // namespace ndde
