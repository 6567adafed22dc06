#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "fairshift/common.hpp"

int main(int argc, char** argv) {
  fairshift::set_verbosity(0);  // exercised warning paths stay quiet in logs
  return doctest::Context(argc, argv).run();
}
