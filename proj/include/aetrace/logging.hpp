#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

namespace aetrace {

enum class LogLevel { Info, Warning, Error };

const char* log_level_name(LogLevel level);

// Line-delimited structured log. Every record carries stage, level, event
// and message plus free-form fields.
class Log {
public:
    virtual ~Log() = default;
    virtual void record(LogLevel level, const std::string& event, const std::string& message,
                        nlohmann::json fields = {}) = 0;

    void info(const std::string& event, const std::string& message, nlohmann::json fields = {}) {
        record(LogLevel::Info, event, message, std::move(fields));
    }
    void warn(const std::string& event, const std::string& message, nlohmann::json fields = {}) {
        record(LogLevel::Warning, event, message, std::move(fields));
    }
    void error(const std::string& event, const std::string& message, nlohmann::json fields = {}) {
        record(LogLevel::Error, event, message, std::move(fields));
    }
};

class NullLog : public Log {
public:
    void record(LogLevel, const std::string&, const std::string&, nlohmann::json) override {}
};

// Shared sink for call sites that do not care about logging.
Log& null_log();

// Keeps records in memory; also counts per level. Used by tests and to build
// the per-stage tallies of the run report.
class MemoryLog : public Log {
public:
    struct Record {
        LogLevel level;
        std::string event;
        std::string message;
        nlohmann::json fields;
    };

    void record(LogLevel level, const std::string& event, const std::string& message,
                nlohmann::json fields) override;

    const std::vector<Record>& records() const { return records_; }
    size_t count(LogLevel level) const;
    bool has_event(const std::string& event) const;

private:
    std::vector<Record> records_;
    mutable std::mutex mu_;
};

// JSONL file sink; optionally mirrors warnings and errors to stderr.
class JsonlLog : public Log {
public:
    JsonlLog(const std::filesystem::path& file, std::string stage, bool echo_stderr = true);

    void record(LogLevel level, const std::string& event, const std::string& message,
                nlohmann::json fields) override;

    size_t warnings() const { return warnings_; }
    size_t errors() const { return errors_; }

private:
    std::ofstream out_;
    std::string stage_;
    bool echo_stderr_;
    size_t warnings_ = 0;
    size_t errors_ = 0;
    std::mutex mu_;
};

// Fans one record out to several sinks.
class TeeLog : public Log {
public:
    TeeLog(Log& a, Log& b) : a_(a), b_(b) {}
    void record(LogLevel level, const std::string& event, const std::string& message,
                nlohmann::json fields) override {
        a_.record(level, event, message, fields);
        b_.record(level, event, message, std::move(fields));
    }

private:
    Log& a_;
    Log& b_;
};

} // namespace aetrace
