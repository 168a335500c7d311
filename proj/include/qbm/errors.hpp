#pragma once

#include <stdexcept>
#include <string>

namespace qbm {

/// Base class for all typed errors thrown by this library. `name()` is a
/// stable identifier used in CSV status fields and CLI exit-code mapping.
class Error : public std::runtime_error {
  public:
    Error(std::string name, const std::string& what)
        : std::runtime_error(what), name_(std::move(name)) {}

    const std::string& name() const { return name_; }

    /// True for errors caused by bad user input rather than numerical failure.
    virtual bool is_input_error() const { return false; }

  private:
    std::string name_;
};

class InvalidParams : public Error {
  public:
    explicit InvalidParams(const std::string& what) : Error("InvalidParams", what) {}
    bool is_input_error() const override { return true; }
};

/// |kappa| >= m*omega0^2: the coupled potential is not confining.
class UnstableSystem : public Error {
  public:
    explicit UnstableSystem(const std::string& what) : Error("UnstableSystem", what) {}
    bool is_input_error() const override { return true; }
};

class DegenerateSpectrum : public Error {
  public:
    explicit DegenerateSpectrum(const std::string& what) : Error("DegenerateSpectrum", what) {}
};

class SingularNormalization : public Error {
  public:
    explicit SingularNormalization(const std::string& what)
        : Error("SingularNormalization", what) {}
};

class ImaginaryResidue : public Error {
  public:
    explicit ImaginaryResidue(const std::string& what) : Error("ImaginaryResidue", what) {}
};

class UnpairedSpectrum : public Error {
  public:
    explicit UnpairedSpectrum(const std::string& what) : Error("UnpairedSpectrum", what) {}
};

class NonPositive : public Error {
  public:
    explicit NonPositive(const std::string& what) : Error("NonPositive", what) {}
};

class NonPhysical : public Error {
  public:
    explicit NonPhysical(const std::string& what) : Error("NonPhysical", what) {}
};

class ClosedFormMismatch : public Error {
  public:
    explicit ClosedFormMismatch(const std::string& what) : Error("ClosedFormMismatch", what) {}
};

class NotHurwitz : public Error {
  public:
    explicit NotHurwitz(const std::string& what) : Error("NotHurwitz", what) {}
};

class StepSizeUnderflow : public Error {
  public:
    explicit StepSizeUnderflow(const std::string& what) : Error("StepSizeUnderflow", what) {}
};

}  // namespace qbm
