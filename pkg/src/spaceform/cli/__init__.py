"""Scene files, reports and the ``spaceform`` command."""
