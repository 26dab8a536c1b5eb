const char *extensions_pipeline = "cpm://cyclic/1.0"; /* cpm preamble */
#define DEADLINE1 100
#define DEADLINE2 250
#define NEW_DEADLINE2 400

/* declarations */
int PeriodicMethod1(TOM*); cpm_cycle_register(PeriodicMethod1);
int PeriodicMethod2(TOM*); cpm_cycle_register(PeriodicMethod2);
int runs1 = 0;
int runs2 = 0;

int PeriodicMethod1(TOM *tom) { runs1++; return 0; }
int PeriodicMethod2(TOM *tom) { runs2++; return 0; }

/* definitions: unnecessary */

/* insertion */
void insertion(void) {
  cpm_cycle_set(PeriodicMethod1, (DEADLINE1));
  cpm_cycle_set(PeriodicMethod2, (DEADLINE2));
}

/* control */
void control(void) {
  cpm_cycle_set(PeriodicMethod2, (NEW_DEADLINE2));
  cpm_cycle_set(PeriodicMethod1, (0));
}
