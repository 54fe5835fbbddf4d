#pragma once

#include "autogbm/error.hpp"

#include <string>

namespace autogbm::detail {

/// Rethrows the in-flight library error with `context` prepended, keeping its type.
/// Must be called from inside a catch block.
[[noreturn]] inline void rethrow_with_context(const std::string& context) {
    try {
        throw;
    } catch (const SchemaError& e) {
        throw SchemaError(context + ": " + e.what());
    } catch (const ParseError& e) {
        throw ParseError(context + ": " + e.what());
    } catch (const OrderingError& e) {
        throw OrderingError(context + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(context + ": " + e.what());
    } catch (const ArgumentError& e) {
        throw ArgumentError(context + ": " + e.what());
    } catch (const ExtractionError& e) {
        throw ExtractionError(context + ": " + e.what());
    } catch (const NumericError& e) {
        throw NumericError(context + ": " + e.what());
    } catch (const FitError& e) {
        throw FitError(context + ": " + e.what());
    } catch (const InferenceError& e) {
        throw InferenceError(context + ": " + e.what());
    } catch (const StateError& e) {
        throw StateError(context + ": " + e.what());
    } catch (const OptimizationError& e) {
        throw OptimizationError(context + ": " + e.what());
    } catch (const StratificationError& e) {
        throw StratificationError(context + ": " + e.what());
    } catch (const ResamplingError& e) {
        throw ResamplingError(context + ": " + e.what());
    } catch (const MetricError& e) {
        throw MetricError(context + ": " + e.what());
    } catch (const PlanError& e) {
        throw PlanError(context + ": " + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(context + ": " + e.what());
    } catch (const IoError& e) {
        throw IoError(context + ": " + e.what());
    } catch (const Error& e) {
        throw Error(context + ": " + e.what());
    }
}

}  // namespace autogbm::detail
