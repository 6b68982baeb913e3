#ifndef DMPI_CSV_HPP
#define DMPI_CSV_HPP

#include <cinttypes>
#include <cstdio>
#include <string>

#include "dmpi/error.hpp"

namespace dmpi {

// Minimal CSV writer with deterministic number formatting (%.17g keeps
// doubles bit-exact on round trip).
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : f_(std::fopen(path.c_str(), "wb")) {
        if (f_ == nullptr) throw Error("IoError", "cannot open '" + path + "' for writing");
    }
    ~CsvWriter() {
        if (f_ != nullptr) std::fclose(f_);
    }
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    CsvWriter& field(const char* s) {
        sep();
        std::fputs(s, f_);
        return *this;
    }
    CsvWriter& field(const std::string& s) { return field(s.c_str()); }
    CsvWriter& field(double v) {
        sep();
        std::fprintf(f_, "%.17g", v);
        return *this;
    }
    CsvWriter& field(std::int64_t v) {
        sep();
        std::fprintf(f_, "%" PRId64, v);
        return *this;
    }
    CsvWriter& field(int v) { return field(static_cast<std::int64_t>(v)); }

    void endrow() {
        std::fputc('\n', f_);
        first_ = true;
    }

private:
    void sep() {
        if (!first_) std::fputc(',', f_);
        first_ = false;
    }

    std::FILE* f_;
    bool first_ = true;
};

} // namespace dmpi

#endif
