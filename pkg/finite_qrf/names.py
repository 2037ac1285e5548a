status_pass = "pass"
status_fail = "fail"
status_precondition_error = "precondition-error"

report_format_json = "json"
report_format_text = "text"

scenario_schema_id = "finite-qrf/scenario/v1"
report_schema_id = "finite-qrf/report/v1"

variant_on_section = "on-section"
variant_lifted = "lifted"
variant_indefinite_orientation = "indefinite-orientation"
variant_stationary_subgroup = "stationary-subgroup"
path_variants = (variant_on_section, variant_lifted, variant_indefinite_orientation, variant_stationary_subgroup)

classification_isometry = "isometry"
classification_diffeomorphism = "diffeomorphism"

toolkit_version = "0.1"
