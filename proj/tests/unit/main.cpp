#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "rsc/log.hpp"

int main(int argc, char** argv)
{
  rsc::set_warnings_enabled(false);
  doctest::Context context(argc, argv);
  return context.run();
}
