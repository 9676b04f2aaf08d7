#pragma once

#include <stdexcept>
#include <string>

namespace aetrace {

// Base class for all pipeline errors. Stages catch Error at item granularity,
// log, and continue; anything else is fatal.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ParseError : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };

// transport / scraping
class FetchError : public Error { public: using Error::Error; };
class ContentError : public Error { public: using Error::Error; };
class StructureError : public Error { public: using Error::Error; };
class DecodeError : public Error { public: using Error::Error; };

// corpus
class ExtractionError : public Error { public: using Error::Error; };
class SectionNotFound : public Error { public: using Error::Error; };
class StorageConflict : public Error { public: using Error::Error; };

// gateway
class GatewayError : public Error { public: using Error::Error; };
class ResponseFormatError : public Error { public: using Error::Error; };

// terminology
class LoadError : public Error { public: using Error::Error; };
class HierarchyError : public Error { public: using Error::Error; };

// downstream
class EmptyTimelineError : public Error { public: using Error::Error; };
class AtcError : public Error { public: using Error::Error; };
class ExportError : public Error { public: using Error::Error; };
class ValidationError : public Error { public: using Error::Error; };
class AnalyticsError : public Error { public: using Error::Error; };
class PrerequisiteError : public Error { public: using Error::Error; };

} // namespace aetrace
