/* The public header must parse as plain C. */
#include "xrmdn/xrmdn.h"

int xrmdn_header_compiles_as_c(void) { return (int)XRMDN_OK; }
