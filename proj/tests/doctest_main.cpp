#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include "cnir/log.hpp"

int main(int argc, char** argv) {
  cnir::log::threshold() = cnir::log::Level::error;
  return doctest::Context(argc, argv).run();
}
