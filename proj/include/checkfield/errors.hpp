#pragma once

#include <stdexcept>
#include <string>

namespace checkfield {

// Base for everything thrown by the engine.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A caller broke a documented precondition (mismatched coordinate spaces,
// degenerate box, empty reference text, ...).
class ContractError : public Error {
public:
    using Error::Error;
};

// Unreadable or malformed input files (images, annotations, detections).
class InputError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Anything that went wrong while talking to a VLM/MLLM backend. `retryable`
// tells the caller whether resending the identical request can help.
class BackendError : public Error {
public:
    BackendError(const std::string& msg, bool retryable)
        : Error(msg), retryable_(retryable) {}
    bool retryable() const { return retryable_; }

private:
    bool retryable_;
};

class TransportError : public BackendError {
public:
    explicit TransportError(const std::string& msg) : BackendError(msg, true) {}
};

class BackendTimeout : public BackendError {
public:
    explicit BackendTimeout(const std::string& msg) : BackendError(msg, true) {}
};

class MalformedResponseError : public BackendError {
public:
    explicit MalformedResponseError(const std::string& msg) : BackendError(msg, false) {}
};

// Backend answered with something outside the allowed set (e.g. a label that
// was not offered). The caller decides whether to retry once.
class ProtocolViolationError : public BackendError {
public:
    explicit ProtocolViolationError(const std::string& msg) : BackendError(msg, false) {}
};

// Replay backend had no scripted response for a request fingerprint.
class MissingFixtureError : public BackendError {
public:
    explicit MissingFixtureError(const std::string& msg) : BackendError(msg, false) {}
};

// OCR reply still missing labels after the one allowed re-prompt.
class OcrIncompleteError : public BackendError {
public:
    explicit OcrIncompleteError(const std::string& msg) : BackendError(msg, false) {}
};

// CER against an empty reference (division by zero reference length).
class UndefinedCerError : public ContractError {
public:
    using ContractError::ContractError;
};

// A model-space box maps entirely into the padding region.
class OutOfContentError : public Error {
public:
    using Error::Error;
};

}  // namespace checkfield
