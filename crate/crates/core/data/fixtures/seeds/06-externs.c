extern void *memcpy(void *, const void *, __SIZE_TYPE__);
void foo(void *p, void *q, int s) { memcpy(p, q, s); }
