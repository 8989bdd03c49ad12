# Fall Detection Toolkit Package
