#pragma once

#include <map>
#include <string>
#include <vector>

namespace dinf {

/// Full-precision, locale-independent float formatting (%.17g).
std::string fmt_double(double x);
/// "k1=v1;k2=v2" with keys in map order.
std::string fmt_params(const std::map<std::string, double>& params);

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    void row(const std::vector<std::string>& cells);
    void row(const std::vector<double>& cells);
    const std::string& str() const { return text_; }
    void save(const std::string& path) const;

private:
    std::size_t columns_;
    std::string text_;
};

}  // namespace dinf
