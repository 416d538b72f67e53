#pragma once

#include <doctest.h>

#include "qkdmm/errors.hpp"

// Checks that `expr` throws qkdmm::Error carrying `expected`.
#define CHECK_ERROR_CODE(expr, expected)                                  \
  do {                                                                    \
    bool threw_ = false;                                                  \
    try {                                                                 \
      (void)(expr);                                                       \
    } catch (const ::qkdmm::Error& e_) {                                  \
      threw_ = true;                                                      \
      CHECK_MESSAGE(e_.code() == (expected), e_.what());                  \
    }                                                                     \
    CHECK_MESSAGE(threw_, "expected " << ::qkdmm::to_string(expected));   \
  } while (false)
