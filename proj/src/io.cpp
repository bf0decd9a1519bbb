#include "eigtemp/io.hpp"

#include "eigtemp/errors.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <memory>
#include <sstream>

namespace eigtemp {

std::string format_double(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), path_(path), columns_(header.size())
{
    if (!out_)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    for (std::size_t i = 0; i < header.size(); ++i)
        out_ << (i ? "," : "") << header[i];
    out_ << '\n';
}

void CsvWriter::sep()
{
    if (pending_ == columns_)
        throw IntegrityError("CsvWriter: too many fields in a row of " + path_.string());
    if (pending_++)
        out_ << ',';
}

CsvWriter& CsvWriter::operator<<(double x)
{
    sep();
    out_ << format_double(x);
    return *this;
}

CsvWriter& CsvWriter::operator<<(long long x)
{
    sep();
    out_ << x;
    return *this;
}

CsvWriter& CsvWriter::operator<<(std::string_view s)
{
    sep();
    out_ << s;
    return *this;
}

void CsvWriter::end_row()
{
    if (pending_ != columns_)
        throw IntegrityError("CsvWriter: short row in " + path_.string());
    out_ << '\n';
    pending_ = 0;
}

void CsvWriter::close()
{
    out_.close();
    if (!out_)
        throw std::runtime_error("write failed: " + path_.string());
}

std::string sha256_hex(std::string_view bytes)
{
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string s;
    for (unsigned int i = 0; i < len; ++i) {
        s += hex[md[i] >> 4];
        s += hex[md[i] & 15];
    }
    return s;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_text(path)); }

void write_text_atomic(const std::filesystem::path& path, std::string_view text)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out)
            throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace eigtemp
