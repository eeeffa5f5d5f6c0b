#ifndef DHAZ_FORMULA_HPP
#define DHAZ_FORMULA_HPP

// Model formula mini-language:
//   y ~ time(dummies) + age + ui
//   y ~ time(spline[10,3,2]) + s(age,25) + logwage
//   y ~ 1
// time(...) selects the baseline encoding, s(name[,n,d,m]) a P-spline
// covariate smooth, bare names enter linearly.

#include <cctype>
#include <stdexcept>
#include <string>
#include <vector>

namespace dhaz {

struct FormulaSmooth {
    std::string name;
    int n_basis = 0; // 0 = module default
    int degree = 3;
    int penalty_order = 2;
};

struct FormulaSpec {
    enum class TimeTerm { dummies, spline, none };
    TimeTerm time_term = TimeTerm::none;
    FormulaSmooth time_spline; // when time_term == spline
    std::vector<FormulaSmooth> smooths;
    std::vector<std::string> linear;
    bool intercept_only = false;
};

namespace detail {

inline std::string strip_ws(const std::string& s) {
    std::string out;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
    return out;
}

inline std::vector<std::string> split_top(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    int depth = 0;
    for (char c : s) {
        if (c == '(' || c == '[') ++depth;
        if (c == ')' || c == ']') --depth;
        if (c == sep && depth == 0) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    return parts;
}

inline std::vector<int> parse_int_list(const std::string& s, const std::string& context) {
    std::vector<int> out;
    if (s.empty()) return out;
    for (const auto& piece : split_top(s, ',')) {
        try {
            std::size_t used = 0;
            int v = std::stoi(piece, &used);
            if (used != piece.size()) throw std::invalid_argument(piece);
            out.push_back(v);
        } catch (...) {
            throw std::invalid_argument("bad integer \"" + piece + "\" in " + context);
        }
    }
    return out;
}

} // namespace detail

inline FormulaSpec parse_formula(const std::string& text) {
    std::string s = detail::strip_ws(text);
    auto tilde = s.find('~');
    if (tilde == std::string::npos) throw std::invalid_argument("formula needs \"y ~ ...\"");
    if (s.substr(0, tilde) != "y")
        throw std::invalid_argument("formula response must be y");
    std::string rhs = s.substr(tilde + 1);
    if (rhs.empty()) throw std::invalid_argument("empty formula right-hand side");

    FormulaSpec spec;
    if (rhs == "1") {
        spec.intercept_only = true;
        return spec;
    }

    for (const auto& term : detail::split_top(rhs, '+')) {
        if (term.empty()) throw std::invalid_argument("empty term in formula");
        if (term.rfind("time(", 0) == 0 && term.back() == ')') {
            if (spec.time_term != FormulaSpec::TimeTerm::none)
                throw std::invalid_argument("duplicate time term");
            std::string inner = term.substr(5, term.size() - 6);
            if (inner == "dummies") {
                spec.time_term = FormulaSpec::TimeTerm::dummies;
            } else if (inner.rfind("spline", 0) == 0) {
                spec.time_term = FormulaSpec::TimeTerm::spline;
                spec.time_spline.name = "timeInt";
                std::string args = inner.substr(6);
                if (!args.empty()) {
                    if (args.front() != '[' || args.back() != ']')
                        throw std::invalid_argument("time spline options must be [n,d,m]");
                    auto ints = detail::parse_int_list(args.substr(1, args.size() - 2), term);
                    if (ints.size() > 3) throw std::invalid_argument("too many spline options");
                    if (ints.size() > 0) spec.time_spline.n_basis = ints[0];
                    if (ints.size() > 1) spec.time_spline.degree = ints[1];
                    if (ints.size() > 2) spec.time_spline.penalty_order = ints[2];
                }
            } else {
                throw std::invalid_argument("time term must be time(dummies) or time(spline[...])");
            }
        } else if (term.rfind("s(", 0) == 0 && term.back() == ')') {
            std::string inner = term.substr(2, term.size() - 3);
            auto parts = detail::split_top(inner, ',');
            if (parts.empty() || parts[0].empty())
                throw std::invalid_argument("smooth term needs a variable name");
            FormulaSmooth sm;
            sm.name = parts[0];
            if (parts.size() > 4) throw std::invalid_argument("too many smooth options");
            auto ints = detail::parse_int_list(
                inner.size() > parts[0].size() ? inner.substr(parts[0].size() + 1) : "", term);
            if (ints.size() > 0) sm.n_basis = ints[0];
            if (ints.size() > 1) sm.degree = ints[1];
            if (ints.size() > 2) sm.penalty_order = ints[2];
            spec.smooths.push_back(sm);
        } else {
            for (char c : term)
                if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'))
                    throw std::invalid_argument("bad term: " + term);
            spec.linear.push_back(term);
        }
    }
    return spec;
}

} // namespace dhaz

#endif
