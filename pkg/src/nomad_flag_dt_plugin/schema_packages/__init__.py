from nomad.config.models.plugins import SchemaPackageEntryPoint


class FlagDTSchemaPackageEntryPoint(SchemaPackageEntryPoint):
    def load(self):
        from nomad_flag_dt_plugin.schema_packages.schema_package import m_package

        return m_package


schema_package_entry_point = FlagDTSchemaPackageEntryPoint(
    name='Flag DT schema package',
    description='Schema package for invariant gauge theory runs on SU(3)/T^2.',
)
