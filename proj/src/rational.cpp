#include "restake/rational.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "restake/error.hpp"

namespace restake {

namespace {

bool is_integer_token(std::string_view s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

}  // namespace

Rat rat_from_decimal(std::string_view text) {
    std::string s(text);
    auto dot = s.find('.');
    if (dot == std::string::npos) {
        if (!is_integer_token(s)) throw Error("parse-error", "not a decimal number: '" + s + "'");
        return Rat(mpz_class(s), 1);
    }
    std::string head = s.substr(0, dot);
    std::string frac = s.substr(dot + 1);
    bool negative = !head.empty() && head[0] == '-';
    if (head == "-" || head == "+" || head.empty()) head += "0";
    if (!is_integer_token(head) || (!frac.empty() && !is_integer_token(frac)))
        throw Error("parse-error", "not a decimal number: '" + s + "'");
    mpz_class scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    mpz_class whole(head);
    mpz_class digits = frac.empty() ? mpz_class(0) : mpz_class(frac);
    mpz_class num = whole * scale + (negative ? -digits : digits);
    Rat r(num, scale);
    r.canonicalize();
    return r;
}

Rat rat_from_double(double value) {
    if (!std::isfinite(value)) throw Error("parse-error", "non-finite value");
    int exp = 0;
    double mantissa = std::frexp(value, &exp);
    auto scaled = static_cast<long long>(std::ldexp(mantissa, 53));
    exp -= 53;
    Rat r(static_cast<long>(scaled));
    mpz_class two_pow;
    mpz_ui_pow_ui(two_pow.get_mpz_t(), 2, static_cast<unsigned long>(exp < 0 ? -exp : exp));
    if (exp >= 0) r *= Rat(two_pow);
    else r /= Rat(two_pow);
    r.canonicalize();
    return r;
}

Rat rat_parse(std::string_view text) {
    // Trim surrounding whitespace.
    std::size_t b = 0, e = text.size();
    while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
    std::string s(text.substr(b, e - b));
    if (s.empty()) throw Error("parse-error", "empty number");

    auto slash = s.find('/');
    if (slash != std::string::npos) {
        std::string num = s.substr(0, slash);
        std::string den = s.substr(slash + 1);
        if (!is_integer_token(num) || !is_integer_token(den))
            throw Error("parse-error", "not a fraction: '" + s + "'");
        mpz_class d(den);
        if (d == 0) throw Error("parse-error", "zero denominator: '" + s + "'");
        Rat r(mpz_class(num), d);
        r.canonicalize();
        return r;
    }
    return rat_from_decimal(s);
}

std::string rat_to_fraction(const Rat& r) {
    if (r.get_den() == 1) return r.get_num().get_str();
    return r.get_num().get_str() + "/" + r.get_den().get_str();
}

std::string rat_to_decimal(const Rat& r, int digits) {
    if (digits < 0) digits = 0;
    mpz_class scale = 1;
    for (int i = 0; i < digits; ++i) scale *= 10;
    mpz_class num = r.get_num() * scale * 2;  // doubled for round-half-away
    mpz_class q = num / r.get_den();
    bool negative = q < 0;
    if (negative) q = -q;
    mpz_class rounded = (q + 1) / 2;
    std::string body = rounded.get_str();
    if (static_cast<int>(body.size()) <= digits) body.insert(0, digits + 1 - body.size(), '0');
    std::string out = negative ? "-" : "";
    if (digits == 0) return out + body;
    out += body.substr(0, body.size() - digits);
    out += ".";
    out += body.substr(body.size() - digits);
    return out;
}

}  // namespace restake
