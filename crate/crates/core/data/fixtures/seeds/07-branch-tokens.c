/* BRANCH_ALPHA */
int alpha(void) { return 1; }
