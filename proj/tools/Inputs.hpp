#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "miniamr/IntVect.hpp"

namespace miniamr::tools {

class InputsError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

//! Key -> value list read from `key = v1 v2 ...` lines. Later definitions win.
class InputsTable {
  public:
    //! Parses text; `source` names it in error messages.
    static InputsTable parse(std::string_view text, const std::string& source = "<inputs>");

    //! Applies one `key=value ...` override.
    void apply_override(const std::string& arg);
    void set(const std::string& key, std::vector<std::string> values);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::vector<std::string>& raw(const std::string& key) const;
    //! Keys in the order they were first defined.
    const std::vector<std::string>& keys() const noexcept { return order_; }

    int get_int(const std::string& key) const;
    int get_int(const std::string& key, int def) const { return has(key) ? get_int(key) : def; }
    long long get_long(const std::string& key) const;
    long long get_long(const std::string& key, long long def) const { return has(key) ? get_long(key) : def; }
    double get_real(const std::string& key) const;
    double get_real(const std::string& key, double def) const { return has(key) ? get_real(key) : def; }
    bool get_bool(const std::string& key) const;
    bool get_bool(const std::string& key, bool def) const { return has(key) ? get_bool(key) : def; }
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& def) const {
        return has(key) ? get_string(key) : def;
    }
    std::vector<int> get_ints(const std::string& key) const;
    std::vector<double> get_reals(const std::string& key) const;
    //! One value (applied to every axis) or one per axis; a third value is
    //! accepted and ignored in lower-dimensional builds.
    IntVect get_intvect(const std::string& key) const;
    IntVect get_intvect(const std::string& key, const IntVect& def) const { return has(key) ? get_intvect(key) : def; }

  private:
    const std::string& scalar(const std::string& key) const;
    std::map<std::string, std::vector<std::string>> values_;
    std::vector<std::string> order_;
};

//! Reads path (empty: no file) and then applies argv overrides in order.
InputsTable read_inputs(const std::string& path, const std::vector<std::string>& overrides = {});

} // namespace miniamr::tools
