#include "Inputs.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace miniamr::tools {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string tok; in >> tok;) out.push_back(tok);
    return out;
}

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k)
        if (std::isspace(static_cast<unsigned char>(c)) || c == '=') return false;
    return true;
}

template <class T>
T parse_number(const std::string& key, const std::string& v, const char* what) {
    T out{};
    const char* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end)
        throw InputsError("inputs: key '" + key + "' value '" + v + "' is not " + what);
    return out;
}

} // namespace

InputsTable InputsTable::parse(std::string_view text, const std::string& source) {
    InputsTable t;
    int lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        const std::string key = eq == std::string::npos ? std::string() : trim(std::string_view(body).substr(0, eq));
        if (eq == std::string::npos || !valid_key(key))
            throw InputsError(source + ":" + std::to_string(lineno) + ": expected `key = value ...`, got `" + body + "`");
        auto values = split(body.substr(eq + 1));
        if (values.empty()) throw InputsError(source + ":" + std::to_string(lineno) + ": key '" + key + "' has no value");
        t.set(key, std::move(values));
    }
    return t;
}

void InputsTable::apply_override(const std::string& arg) {
    const auto eq = arg.find('=');
    const std::string key = eq == std::string::npos ? std::string() : trim(std::string_view(arg).substr(0, eq));
    if (!valid_key(key)) throw InputsError("inputs: override '" + arg + "' is not key=value");
    auto values = split(arg.substr(eq + 1));
    if (values.empty()) throw InputsError("inputs: override '" + arg + "' has no value");
    set(key, std::move(values));
}

void InputsTable::set(const std::string& key, std::vector<std::string> values) {
    if (!values_.count(key)) order_.push_back(key);
    values_[key] = std::move(values);
}

const std::vector<std::string>& InputsTable::raw(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw InputsError("inputs: missing key '" + key + "'");
    return it->second;
}

const std::string& InputsTable::scalar(const std::string& key) const {
    const auto& v = raw(key);
    if (v.size() != 1) throw InputsError("inputs: key '" + key + "' expects one value, got " + std::to_string(v.size()));
    return v[0];
}

int InputsTable::get_int(const std::string& key) const { return parse_number<int>(key, scalar(key), "an integer"); }

long long InputsTable::get_long(const std::string& key) const {
    return parse_number<long long>(key, scalar(key), "an integer");
}

double InputsTable::get_real(const std::string& key) const { return parse_number<double>(key, scalar(key), "a number"); }

bool InputsTable::get_bool(const std::string& key) const {
    const auto& v = scalar(key);
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw InputsError("inputs: key '" + key + "' value '" + v + "' is not a boolean");
}

std::string InputsTable::get_string(const std::string& key) const { return scalar(key); }

std::vector<int> InputsTable::get_ints(const std::string& key) const {
    std::vector<int> out;
    for (const auto& v : raw(key)) out.push_back(parse_number<int>(key, v, "an integer"));
    return out;
}

std::vector<double> InputsTable::get_reals(const std::string& key) const {
    std::vector<double> out;
    for (const auto& v : raw(key)) out.push_back(parse_number<double>(key, v, "a number"));
    return out;
}

IntVect InputsTable::get_intvect(const std::string& key) const {
    const auto v = get_ints(key);
    if (v.size() == 1) return IntVect(v[0]);
    if (v.size() != std::size_t(SpaceDim) && v.size() != 3)
        throw InputsError("inputs: key '" + key + "' expects 1 or " + std::to_string(SpaceDim) + " values");
    IntVect out;
    for (int d = 0; d < SpaceDim; ++d) out[d] = v[d];
    return out;
}

InputsTable read_inputs(const std::string& path, const std::vector<std::string>& overrides) {
    InputsTable t;
    if (!path.empty()) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw InputsError("inputs: cannot open '" + path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        t = InputsTable::parse(ss.str(), path);
    }
    for (const auto& o : overrides) t.apply_override(o);
    return t;
}

} // namespace miniamr::tools
