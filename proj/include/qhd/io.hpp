#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>

namespace qhd {

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double v);

/// Minimal CSV writer: one header row, then rows of preformatted cells.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header);

    CsvWriter& cell(double v);
    CsvWriter& cell(std::int64_t v);
    CsvWriter& cell(std::uint64_t v);
    CsvWriter& cell(int v) { return cell(static_cast<std::int64_t>(v)); }
    CsvWriter& cell(bool v);
    CsvWriter& cell(std::string_view v);
    void end_row();

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    void sep();

    std::filesystem::path path_;
    std::ofstream out_;
    bool first_ = true;
};

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace qhd
