#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace eigtemp {

/// Shortest decimal that parses back to the same double; "nan", "inf", "-inf".
std::string format_double(double x);

/// Comma-separated, header row, LF line endings. Fields are written as given
/// (callers only pass numbers and plain identifiers).
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

    CsvWriter& operator<<(double x);
    CsvWriter& operator<<(long long x);
    CsvWriter& operator<<(int x) { return *this << static_cast<long long>(x); }
    CsvWriter& operator<<(std::size_t x) { return *this << static_cast<long long>(x); }
    CsvWriter& operator<<(bool x) { return *this << static_cast<long long>(x ? 1 : 0); }
    CsvWriter& operator<<(std::string_view s);
    CsvWriter& operator<<(const char* s) { return *this << std::string_view(s); }
    void end_row();
    void close();

private:
    void sep();
    std::ofstream out_;
    std::filesystem::path path_;
    std::size_t columns_ = 0;
    std::size_t pending_ = 0;
};

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Writes text to path via a temporary file and rename.
void write_text_atomic(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

} // namespace eigtemp
